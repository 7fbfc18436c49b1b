#!/usr/bin/env python3
"""Regenerate data/tpch_sample/: small deterministic TPC-H-style .tbl files.

The sample keeps the benchmark's shape (real nation/region values, key
relationships intact) at desk scale so the execution harness and demos can
run without the official data generator. Output is stable for a fixed seed;
rerunning this script must not produce a diff.
"""

from __future__ import annotations

import random
from datetime import date, timedelta
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "tpch_sample"
SEED = 20250810

REGIONS = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"]
# (nation name, region key) per the TPC-H specification's nation table
NATIONS = [
    ("ALGERIA", 0), ("ARGENTINA", 1), ("BRAZIL", 1), ("CANADA", 1),
    ("EGYPT", 4), ("ETHIOPIA", 0), ("FRANCE", 3), ("GERMANY", 3),
    ("INDIA", 2), ("INDONESIA", 2), ("IRAN", 4), ("IRAQ", 4),
    ("JAPAN", 2), ("JORDAN", 4), ("KENYA", 0), ("MOROCCO", 0),
    ("MOZAMBIQUE", 0), ("PERU", 1), ("CHINA", 2), ("ROMANIA", 3),
    ("SAUDI ARABIA", 4), ("VIETNAM", 2), ("RUSSIA", 3),
    ("UNITED KINGDOM", 3), ("UNITED STATES", 1),
]
SEGMENTS = ["AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"]
PRIORITIES = ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"]
INSTRUCTIONS = ["DELIVER IN PERSON", "COLLECT COD", "NONE", "TAKE BACK RETURN"]
MODES = ["AIR", "FOB", "MAIL", "RAIL", "REG AIR", "SHIP", "TRUCK"]
CONTAINERS = ["JUMBO PKG", "LG CASE", "MED BOX", "SM DRUM", "WRAP BAG"]
TYPE_WORDS = (
    ["STANDARD", "SMALL", "MEDIUM", "LARGE", "ECONOMY", "PROMO"],
    ["ANODIZED", "BURNISHED", "PLATED", "POLISHED", "BRUSHED"],
    ["TIN", "NICKEL", "BRASS", "STEEL", "COPPER"],
)
PART_WORDS = [
    "almond", "antique", "aquamarine", "azure", "beige", "bisque", "black",
    "blue", "brown", "chartreuse", "cornsilk", "cream", "dark", "drab",
    "firebrick", "floral", "forest", "ghost", "goldenrod", "green",
]
COMMENT_WORDS = [
    "carefully", "quickly", "slyly", "furiously", "requests", "deposits",
    "accounts", "packages", "theodolites", "instructions", "pending", "final",
    "ironic", "express", "regular", "bold", "even", "silent", "daring", "idle",
]

SUPPLIER_COUNT = 40
PART_COUNT = 60
CUSTOMER_COUNT = 50
ORDER_COUNT = 150


def words(rng: random.Random, low: int, high: int) -> str:
    return " ".join(rng.choice(COMMENT_WORDS) for _ in range(rng.randint(low, high)))


def phone(rng: random.Random, nation_key: int) -> str:
    return f"{10 + nation_key}-{rng.randint(100, 999)}-{rng.randint(100, 999)}-{rng.randint(1000, 9999)}"


def money(rng: random.Random, low: float, high: float) -> str:
    return f"{rng.uniform(low, high):.2f}"


def iso(day: date) -> str:
    return day.isoformat()


def main() -> None:
    rng = random.Random(SEED)
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    def write(table: str, rows) -> None:
        path = OUT_DIR / f"{table}.tbl"
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write("|".join(str(v) for v in row) + "|\n")
        print(f"{path.name}: {len(rows)} rows")

    write("region", [(i, name, words(rng, 3, 6)) for i, name in enumerate(REGIONS)])
    write(
        "nation",
        [(i, name, region, words(rng, 3, 6)) for i, (name, region) in enumerate(NATIONS)],
    )

    suppliers = [
        (
            key,
            f"Supplier#{key:09d}",
            f"{rng.randint(1, 999)} {rng.choice(PART_WORDS)} street",
            rng.randrange(len(NATIONS)),
            "",  # placeholder, replaced below (phone depends on nation)
            money(rng, -900, 9900),
            words(rng, 4, 9),
        )
        for key in range(1, SUPPLIER_COUNT + 1)
    ]
    suppliers = [
        (key, name, addr, nk, phone(rng, nk), bal, comment)
        for (key, name, addr, nk, _, bal, comment) in suppliers
    ]
    write("supplier", suppliers)

    parts = [
        (
            key,
            " ".join(rng.sample(PART_WORDS, 3)),
            f"Manufacturer#{rng.randint(1, 5)}",
            f"Brand#{rng.randint(1, 5)}{rng.randint(1, 5)}",
            " ".join(rng.choice(group) for group in TYPE_WORDS),
            rng.randint(1, 50),
            rng.choice(CONTAINERS),
            money(rng, 900, 2000),
            words(rng, 2, 4),
        )
        for key in range(1, PART_COUNT + 1)
    ]
    write("part", parts)

    part_suppliers: dict[int, list[int]] = {}
    partsupp_rows = []
    for part_key in range(1, PART_COUNT + 1):
        chosen = rng.sample(range(1, SUPPLIER_COUNT + 1), 4)
        part_suppliers[part_key] = chosen
        for supp_key in chosen:
            partsupp_rows.append(
                (part_key, supp_key, rng.randint(1, 9999), money(rng, 1, 1000), words(rng, 5, 12))
            )
    write("partsupp", partsupp_rows)

    customers = [
        (
            key,
            f"Customer#{key:09d}",
            f"{rng.randint(1, 999)} {rng.choice(PART_WORDS)} avenue",
            rng.randrange(len(NATIONS)),
            phone(rng, rng.randrange(len(NATIONS))),
            money(rng, -900, 9900),
            rng.choice(SEGMENTS),
            words(rng, 5, 10),
        )
        for key in range(1, CUSTOMER_COUNT + 1)
    ]
    write("customer", customers)

    epoch = date(1992, 1, 1)
    orders = []
    lineitems = []
    for order_key in range(1, ORDER_COUNT + 1):
        order_date = epoch + timedelta(days=rng.randint(0, 2400))
        line_count = rng.randint(1, 6)
        lines = []
        total = 0.0
        for line_number in range(1, line_count + 1):
            part_key = rng.randint(1, PART_COUNT)
            supp_key = rng.choice(part_suppliers[part_key])
            quantity = rng.randint(1, 50)
            extended = round(quantity * rng.uniform(900, 2000), 2)
            total += extended
            ship = order_date + timedelta(days=rng.randint(1, 120))
            commit = order_date + timedelta(days=rng.randint(1, 120))
            receipt = ship + timedelta(days=rng.randint(1, 30))
            lines.append(
                (
                    order_key,
                    part_key,
                    supp_key,
                    line_number,
                    quantity,
                    f"{extended:.2f}",
                    f"{rng.uniform(0, 0.10):.2f}",
                    f"{rng.uniform(0, 0.08):.2f}",
                    rng.choice(["A", "N", "R"]),
                    rng.choice(["F", "O"]),
                    iso(ship),
                    iso(commit),
                    iso(receipt),
                    rng.choice(INSTRUCTIONS),
                    rng.choice(MODES),
                    words(rng, 2, 5),
                )
            )
        orders.append(
            (
                order_key,
                rng.randint(1, CUSTOMER_COUNT),
                rng.choice(["F", "O", "P"]),
                f"{total:.2f}",
                iso(order_date),
                rng.choice(PRIORITIES),
                f"Clerk#{rng.randint(1, 20):09d}",
                0,
                words(rng, 4, 10),
            )
        )
        lineitems.extend(lines)
    write("orders", orders)
    write("lineitem", lineitems)


if __name__ == "__main__":
    main()
