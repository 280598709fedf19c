"""Bundled product inventory: an 80-entry fixture catalog spanning four
grocery categories (20 each), of which 18 stock the default synthetic
shelf.

Barcodes are sequential and stable; they key everything downstream
(catalog entries, reference caches, shelf cells).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .catalog import CatalogEntry, save_catalog

CATEGORIES = ("Dairy and Eggs", "Pantry", "Snacks", "Beverages")

_IMAGE_URL = "https://images.example.org/products/{barcode}/{n}.png"
_BARCODE_BASE = 4_000_000_000_000


@dataclass(frozen=True)
class InventoryItem:
    barcode: str
    brand: str
    name: str
    quantity: str
    category: str


def _items() -> list[InventoryItem]:
    raw: list[tuple[str, str, str]] = []

    # Dairy and Eggs
    raw += [
        ("Horizon Organic", "Whole Milk", "64 oz"),
        ("Chobani", "Plain Greek Yogurt", "32 oz"),
        ("Tillamook", "Sharp Cheddar Cheese", "8 oz"),
        ("Land O Lakes", "Salted Butter", "16 oz"),
        ("Egglands Best", "Large Grade A Eggs", "12 count"),
        ("Fairlife", "Lactose Free Reduced Fat Milk", "52 oz"),
        ("Philadelphia", "Original Cream Cheese", "8 oz"),
        ("Yoplait", "Strawberry Yogurt", "6 oz"),
        ("Kerrygold", "Pure Irish Butter", "8 oz"),
        ("Sargento", "Mozzarella Cheese Sticks", "9 oz"),
        ("Organic Valley", "Heavy Whipping Cream", "16 oz"),
        ("Silk", "Unsweetened Almond Milk", "64 oz"),
        ("Stonyfield", "Organic Whole Milk Yogurt", "32 oz"),
        ("Daisy", "Pure Sour Cream", "16 oz"),
        ("Babybel", "Original Snack Cheese", "4.5 oz"),
        ("Lactaid", "Whole Milk Lactose Free", "96 oz"),
        ("Breakstones", "Small Curd Cottage Cheese", "16 oz"),
        ("Oikos", "Triple Zero Vanilla Greek Yogurt", "5.3 oz"),
        ("Challenge", "Unsalted Butter Sticks", "16 oz"),
        ("Almond Breeze", "Vanilla Almond Milk", "32 oz"),
    ]
    # Pantry
    raw += [
        ("Barilla", "Penne Pasta", "16 oz"),
        ("Raos", "Marinara Sauce", "24 oz"),
        ("King Arthur", "All Purpose Flour", "80 oz"),
        ("Domino", "Granulated Sugar", "64 oz"),
        ("Heinz", "Tomato Ketchup", "32 oz"),
        ("Hellmanns", "Real Mayonnaise", "30 oz"),
        ("Jif", "Creamy Peanut Butter", "40 oz"),
        ("Smuckers", "Strawberry Jam", "18 oz"),
        ("Quaker", "Old Fashioned Oats", "42 oz"),
        ("Bens Original", "Long Grain White Rice", "32 oz"),
        ("Progresso", "Chicken Noodle Soup", "19 oz"),
        ("Bushs", "Original Baked Beans", "28 oz"),
        ("Hunts", "Diced Tomatoes", "14.5 oz"),
        ("Bertolli", "Extra Virgin Olive Oil", "25 oz"),
        ("McCormick", "Ground Black Pepper", "3 oz"),
        ("Morton", "Iodized Salt", "26 oz"),
        ("Kelloggs", "Corn Flakes Cereal", "18 oz"),
        ("General Mills", "Honey Nut Cheerios", "15.4 oz"),
        ("Betty Crocker", "Chocolate Fudge Brownie Mix", "18.3 oz"),
        ("Campbells", "Condensed Tomato Soup", "10.75 oz"),
    ]
    # Snacks
    raw += [
        ("Lays", "Classic Potato Chips", "8 oz"),
        ("Doritos", "Nacho Cheese Tortilla Chips", "9.25 oz"),
        ("Cheez It", "Original Baked Snack Crackers", "12.4 oz"),
        ("Oreo", "Chocolate Sandwich Cookies", "14.3 oz"),
        ("Ritz", "Original Crackers", "13.7 oz"),
        ("Pringles", "Sour Cream and Onion Chips", "5.5 oz"),
        ("Tostitos", "Scoops Tortilla Chips", "10 oz"),
        ("Goldfish", "Cheddar Baked Crackers", "6.6 oz"),
        ("Pop Secret", "Movie Theater Butter Popcorn", "19.2 oz"),
        ("Planters", "Dry Roasted Peanuts", "16 oz"),
        ("Nature Valley", "Oats and Honey Crunchy Granola Bars", "8.9 oz"),
        ("Clif Bar", "Chocolate Chip Energy Bar", "2.4 oz"),
        ("Welchs", "Mixed Fruit Snacks", "9 oz"),
        ("Snyders", "Mini Pretzels", "16 oz"),
        ("Triscuit", "Original Whole Grain Wheat Crackers", "8.5 oz"),
        ("Chex Mix", "Traditional Savory Snack Mix", "8.75 oz"),
        ("Skinny Pop", "Original Popcorn", "4.4 oz"),
        ("Blue Diamond", "Smokehouse Almonds", "6 oz"),
        ("Slim Jim", "Original Smoked Snack Sticks", "3.9 oz"),
        ("Rice Krispies", "Original Marshmallow Treats", "12.4 oz"),
    ]
    # Beverages
    raw += [
        ("Spindrift", "Lime Sparkling Water", "12 oz"),
        ("Simply", "Lemonade with Strawberry", "52 oz"),
        ("Stok", "Cold Brew Coffee", "48 oz"),
        ("Coca-Cola", "Classic Soda", "12 oz"),
        ("Pepsi", "Cola Soda", "20 oz"),
        ("Tropicana", "Pure Premium Orange Juice", "52 oz"),
        ("Gatorade", "Lemon Lime Thirst Quencher", "28 oz"),
        ("Red Bull", "Energy Drink", "8.4 oz"),
        ("La Croix", "Pamplemousse Sparkling Water", "12 oz"),
        ("Honest", "Organic Honey Green Tea", "16.9 oz"),
        ("Starbucks", "Frappuccino Mocha Coffee Drink", "13.7 oz"),
        ("Ocean Spray", "Cranberry Juice Cocktail", "64 oz"),
        ("Minute Maid", "Premium Apple Juice", "59 oz"),
        ("Polar", "Black Cherry Seltzer", "33.8 oz"),
        ("Arizona", "Green Tea with Ginseng and Honey", "23 oz"),
        ("V8", "Original Vegetable Juice", "46 oz"),
        ("Snapple", "Peach Tea", "16 oz"),
        ("Celsius", "Sparkling Orange Energy Drink", "12 oz"),
        ("Canada Dry", "Ginger Ale", "12 oz"),
        ("Folgers", "Classic Roast Ground Coffee", "25.9 oz"),
    ]

    items = []
    for idx, (brand, name, quantity) in enumerate(raw):
        items.append(
            InventoryItem(
                barcode=str(_BARCODE_BASE + idx),
                brand=brand,
                name=name,
                quantity=quantity,
                category=CATEGORIES[idx // 20],
            )
        )
    return items


FIXTURE_ITEMS: tuple[InventoryItem, ...] = tuple(_items())

# The 18 products stocked on the default shelf, row-major from the top
# tier: 6 beverages up top, 6 snacks in the middle, 6 pantry/dairy below.
SHELF_STOCK: tuple[tuple[str, str], ...] = (
    ("Spindrift", "Lime Sparkling Water"),
    ("Simply", "Lemonade with Strawberry"),
    ("Stok", "Cold Brew Coffee"),
    ("Coca-Cola", "Classic Soda"),
    ("La Croix", "Pamplemousse Sparkling Water"),
    ("Tropicana", "Pure Premium Orange Juice"),
    ("Lays", "Classic Potato Chips"),
    ("Doritos", "Nacho Cheese Tortilla Chips"),
    ("Oreo", "Chocolate Sandwich Cookies"),
    ("Cheez It", "Original Baked Snack Crackers"),
    ("Goldfish", "Cheddar Baked Crackers"),
    ("Planters", "Dry Roasted Peanuts"),
    ("Barilla", "Penne Pasta"),
    ("Raos", "Marinara Sauce"),
    ("Jif", "Creamy Peanut Butter"),
    ("Quaker", "Old Fashioned Oats"),
    ("Heinz", "Tomato Ketchup"),
    ("Horizon Organic", "Whole Milk"),
)

# Physical presentation of each shelf product: (size class, packaging).
SHELF_PRESENTATION: dict[tuple[str, str], tuple[str, str]] = {
    ("Spindrift", "Lime Sparkling Water"): ("small", "can"),
    ("Simply", "Lemonade with Strawberry"): ("large", "bottle"),
    ("Stok", "Cold Brew Coffee"): ("large", "bottle"),
    ("Coca-Cola", "Classic Soda"): ("small", "can"),
    ("La Croix", "Pamplemousse Sparkling Water"): ("small", "can"),
    ("Tropicana", "Pure Premium Orange Juice"): ("large", "bottle"),
    ("Lays", "Classic Potato Chips"): ("medium", "box"),
    ("Doritos", "Nacho Cheese Tortilla Chips"): ("medium", "box"),
    ("Oreo", "Chocolate Sandwich Cookies"): ("small", "box"),
    ("Cheez It", "Original Baked Snack Crackers"): ("medium", "box"),
    ("Goldfish", "Cheddar Baked Crackers"): ("small", "box"),
    ("Planters", "Dry Roasted Peanuts"): ("medium", "can"),
    ("Barilla", "Penne Pasta"): ("medium", "box"),
    ("Raos", "Marinara Sauce"): ("medium", "bottle"),
    ("Jif", "Creamy Peanut Butter"): ("medium", "bottle"),
    ("Quaker", "Old Fashioned Oats"): ("large", "can"),
    ("Heinz", "Tomato Ketchup"): ("medium", "bottle"),
    ("Horizon Organic", "Whole Milk"): ("large", "box"),
}


def fixture_entries() -> list[CatalogEntry]:
    """The 80-entry fixture catalog as CatalogEntry objects."""
    return [
        CatalogEntry(
            barcode=item.barcode,
            brand=item.brand,
            name=item.name,
            quantity=item.quantity,
            image_refs=(
                _IMAGE_URL.format(barcode=item.barcode, n=0),
                _IMAGE_URL.format(barcode=item.barcode, n=1),
            ),
        )
        for item in FIXTURE_ITEMS
    ]


def item_for(brand: str, name: str) -> InventoryItem:
    for item in FIXTURE_ITEMS:
        if item.brand == brand and item.name == name:
            return item
    raise KeyError(f"{brand} / {name} not in inventory")


def shelf_items() -> list[InventoryItem]:
    """Inventory items for the 18 shelf cells, row-major from the top."""
    return [item_for(brand, name) for brand, name in SHELF_STOCK]


def write_fixture_catalog(path: str | Path) -> None:
    save_catalog(fixture_entries(), path)


def fixture_catalog_path() -> Path:
    """Location of the pregenerated fixture catalog shipped as package data."""
    return Path(__file__).parent / "data" / "catalog_fixture.jsonl"
