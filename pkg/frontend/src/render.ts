/**
 * Canvas shelf painter. Everything drawn comes straight from the scene
 * descriptor: product boxes in frame coordinates, the hand cursor, and
 * the highlighted target.
 */

import type { Scene } from "./protocol.js";

const COLORS = {
  background: "#26262a",
  product: "#3d6ea5",
  productEdge: "#9db8d6",
  target: "#2f9e44",
  hand: "#e0ac69",
  text: "#eeeeee",
};

export function drawScene(canvas: HTMLCanvasElement, scene: Scene | null): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (!scene) {
    return;
  }
  const [frameW, frameH] = scene.frame_size;
  const sx = canvas.width / frameW;
  const sy = canvas.height / frameH;

  for (const product of scene.products) {
    if (!product.bbox || product.out_of_view) {
      continue;
    }
    const [x, y, w, h] = product.bbox;
    const isTarget = scene.target !== null && product.barcode === scene.target.barcode;
    ctx.fillStyle = isTarget ? COLORS.target : COLORS.product;
    ctx.fillRect(x * sx, y * sy, w * sx, h * sy);
    ctx.strokeStyle = COLORS.productEdge;
    ctx.lineWidth = 1;
    ctx.strokeRect(x * sx, y * sy, w * sx, h * sy);
    ctx.fillStyle = COLORS.text;
    ctx.font = "10px sans-serif";
    ctx.fillText(product.label.slice(0, 18), x * sx + 2, y * sy + 11, w * sx - 4);
  }

  if (scene.hand) {
    const [hx, hy] = scene.hand;
    ctx.beginPath();
    ctx.arc(hx * sx, hy * sy, 7, 0, Math.PI * 2);
    ctx.fillStyle = COLORS.hand;
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.stroke();
  }
}

/** Map a canvas pointer position back to engine frame coordinates. */
export function canvasToFrame(
  canvas: HTMLCanvasElement,
  scene: Scene | null,
  clientX: number,
  clientY: number,
): [number, number] | null {
  if (!scene) {
    return null;
  }
  const rect = canvas.getBoundingClientRect();
  const x = ((clientX - rect.left) / rect.width) * scene.frame_size[0];
  const y = ((clientY - rect.top) / rect.height) * scene.frame_size[1];
  if (x < 0 || y < 0 || x > scene.frame_size[0] || y > scene.frame_size[1]) {
    return null;
  }
  return [x, y];
}
