"""Built-in desk-scale schema pack: three database-querying domains used by
tests, benchmarks, and as authoring examples.  Each builder returns the
schema document text (the same JSON format `parse_schema` reads)."""
from __future__ import annotations

import itertools
import json
from pathlib import Path

AREAS = ["north", "south", "east", "west", "centre"]
PRICES = ["cheap", "moderate", "expensive"]
STARS = ["2", "3", "4", "5"]
FOODS = ["italian", "chinese", "indian", "british", "thai", "mexican"]
DAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
CITIES = ["cambridge", "london", "norwich", "peterborough"]


def _phone(i: int) -> str:
    return f"01223 {100000 + i}"


def build_hotel_schema() -> str:
    records = []
    combos = list(itertools.product(AREAS, PRICES, STARS))
    for i, (area, price, stars) in enumerate(combos):
        for j in range(3):
            n = i * 3 + j
            records.append({
                "name": f"hotel {n:03d}",
                "area": area,
                "price": price,
                "stars": stars,
                "parking": "yes" if (n % 2 == 0) else "no",
                "internet": "yes" if (n % 3 == 0) else "no",
                "phone": _phone(n),
                "address": f"{n} station road",
                "postcode": f"cb{n:03d}",
            })
    doc = {
        "domain": "hotel",
        "slots": [
            {"name": "name", "informable": True, "requestable": False, "type": "open"},
            {"name": "area", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "price", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "stars", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "parking", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "internet", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "phone", "informable": False, "requestable": True, "type": "open"},
            {"name": "address", "informable": False, "requestable": True, "type": "open"},
            {"name": "postcode", "informable": False, "requestable": True, "type": "open"},
        ],
        "flow": {
            "entry": "request_info",
            "blocks": [
                {"id": "request_info", "kind": "request_slots",
                 "slots": ["name", "area", "price", "stars", "parking", "internet"]},
                {"id": "lookup", "kind": "query_db", "slots": []},
                {"id": "present", "kind": "inform_result", "slots": ["name"]},
                {"id": "restart", "kind": "ask_start_over", "slots": []},
                {"id": "done", "kind": "end", "slots": []},
            ],
            "edges": [
                {"from": "request_info", "cond": "always", "to": "lookup"},
                {"from": "lookup", "cond": "match", "to": "present"},
                {"from": "lookup", "cond": "no_match", "to": "restart"},
                {"from": "present", "cond": "always", "to": "done"},
                {"from": "restart", "cond": "always", "to": "request_info"},
            ],
        },
        "database": {
            "primary_key": "name",
            "columns": ["name", "area", "price", "stars", "parking", "internet",
                        "phone", "address", "postcode"],
            "records": records,
        },
    }
    return json.dumps(doc, indent=2)


def build_restaurant_schema() -> str:
    records = []
    combos = list(itertools.product(AREAS, FOODS, PRICES))
    for i, (area, food, price) in enumerate(combos):
        for j in range(2):
            n = i * 2 + j
            records.append({
                "name": f"restaurant {n:03d}",
                "area": area,
                "food": food,
                "price": price,
                "phone": _phone(5000 + n),
                "address": f"{n} mill lane",
                "postcode": f"cr{n:03d}",
            })
    doc = {
        "domain": "restaurant",
        "slots": [
            {"name": "area", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "food", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "price", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "name", "informable": False, "requestable": True, "type": "open"},
            {"name": "phone", "informable": False, "requestable": True, "type": "open"},
            {"name": "address", "informable": False, "requestable": True, "type": "open"},
            {"name": "postcode", "informable": False, "requestable": True, "type": "open"},
        ],
        "flow": {
            "entry": "request_info",
            "blocks": [
                {"id": "request_info", "kind": "request_slots",
                 "slots": ["area", "food", "price"]},
                {"id": "lookup", "kind": "query_db", "slots": []},
                {"id": "present", "kind": "inform_result", "slots": ["name"]},
                {"id": "restart", "kind": "ask_start_over", "slots": []},
                {"id": "done", "kind": "end", "slots": []},
            ],
            "edges": [
                {"from": "request_info", "cond": "always", "to": "lookup"},
                {"from": "lookup", "cond": "match", "to": "present"},
                {"from": "lookup", "cond": "no_match", "to": "restart"},
                {"from": "present", "cond": "always", "to": "done"},
                {"from": "restart", "cond": "always", "to": "request_info"},
            ],
        },
        "database": {
            "primary_key": "name",
            "columns": ["name", "area", "food", "price", "phone", "address", "postcode"],
            "records": records,
        },
    }
    return json.dumps(doc, indent=2)


def build_train_schema() -> str:
    records = []
    n = 0
    for dep, dest in itertools.permutations(CITIES, 2):
        for day in DAYS:
            for leave in ("09:00", "17:00"):
                records.append({
                    "id": f"tr{n:04d}",
                    "departure": dep,
                    "destination": dest,
                    "day": day,
                    "leave": leave,
                    "price": f"{10 + n % 40}.{n % 100:02d} pounds",
                    "duration": f"{45 + n % 60} minutes",
                })
                n += 1
    doc = {
        "domain": "train",
        "slots": [
            {"name": "departure", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "destination", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "day", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "leave", "informable": True, "requestable": False, "type": "categorical"},
            {"name": "id", "informable": False, "requestable": True, "type": "open"},
            {"name": "price", "informable": False, "requestable": True, "type": "open"},
            {"name": "duration", "informable": False, "requestable": True, "type": "open"},
        ],
        "flow": {
            "entry": "request_info",
            "blocks": [
                {"id": "request_info", "kind": "request_slots",
                 "slots": ["departure", "destination", "day", "leave"]},
                {"id": "lookup", "kind": "query_db", "slots": []},
                {"id": "present", "kind": "inform_result", "slots": ["id"]},
                {"id": "restart", "kind": "ask_start_over", "slots": []},
                {"id": "done", "kind": "end", "slots": []},
            ],
            "edges": [
                {"from": "request_info", "cond": "always", "to": "lookup"},
                {"from": "lookup", "cond": "match", "to": "present"},
                {"from": "lookup", "cond": "no_match", "to": "restart"},
                {"from": "present", "cond": "always", "to": "done"},
                {"from": "restart", "cond": "always", "to": "request_info"},
            ],
        },
        "database": {
            "primary_key": "id",
            "columns": ["id", "departure", "destination", "day", "leave",
                        "price", "duration"],
            "records": records,
        },
    }
    return json.dumps(doc, indent=2)


BUILDERS = {
    "hotel": build_hotel_schema,
    "restaurant": build_restaurant_schema,
    "train": build_train_schema,
}


def write_pack(directory) -> list[Path]:
    """Materialize all pack schemas as files; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, builder in BUILDERS.items():
        path = directory / f"{name}.json"
        path.write_text(builder(), encoding="utf-8")
        paths.append(path)
    return paths
