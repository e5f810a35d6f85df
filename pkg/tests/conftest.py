import json

import pytest

from taskbot.schema import parse_schema

# Compact hotel fixture: 6 slot defs, request -> query -> (present | restart)
# flow, 5 hand-picked records so query results are easy to enumerate by hand.
HOTEL_DOC = {
    "domain": "hotel",
    "slots": [
        {"name": "name", "informable": False, "requestable": True, "type": "open"},
        {"name": "area", "informable": True, "requestable": False, "type": "categorical"},
        {"name": "price", "informable": True, "requestable": False, "type": "categorical"},
        {"name": "stars", "informable": True, "requestable": False, "type": "categorical"},
        {"name": "parking", "informable": False, "requestable": True, "type": "categorical"},
        {"name": "internet", "informable": False, "requestable": True, "type": "categorical"},
    ],
    "flow": {
        "entry": "request_basic",
        "blocks": [
            {"id": "request_basic", "kind": "request_slots",
             "slots": ["area", "price", "stars"]},
            {"id": "lookup", "kind": "query_db", "slots": []},
            {"id": "present", "kind": "inform_result", "slots": ["name"]},
            {"id": "restart", "kind": "ask_start_over", "slots": []},
            {"id": "done", "kind": "end", "slots": []},
        ],
        "edges": [
            {"from": "request_basic", "cond": "always", "to": "lookup"},
            {"from": "lookup", "cond": "match", "to": "present"},
            {"from": "lookup", "cond": "no_match", "to": "restart"},
            {"from": "present", "cond": "always", "to": "done"},
            {"from": "restart", "cond": "always", "to": "request_basic"},
        ],
    },
    "database": {
        "primary_key": "name",
        "columns": ["name", "area", "price", "stars", "parking", "internet"],
        "records": [
            {"name": "acorn guest house", "area": "west", "price": "moderate",
             "stars": "4", "parking": "yes", "internet": "yes"},
            {"name": "bridge hotel", "area": "centre", "price": "expensive",
             "stars": "4", "parking": "yes", "internet": "no"},
            {"name": "city stop", "area": "east", "price": "cheap",
             "stars": "2", "parking": "no", "internet": "yes"},
            {"name": "den house", "area": "west", "price": "moderate",
             "stars": "4", "parking": "no", "internet": "no"},
            {"name": "express inn", "area": "centre", "price": "moderate",
             "stars": "2", "parking": "yes", "internet": "yes"},
        ],
    },
}


def hotel_doc_text(**changes):
    doc = json.loads(json.dumps(HOTEL_DOC))
    doc.update(changes)
    return json.dumps(doc)


@pytest.fixture
def hotel_doc():
    return hotel_doc_text()


@pytest.fixture
def hotel_schema():
    return parse_schema(hotel_doc_text())


@pytest.fixture(scope="session")
def pack_schemas():
    from taskbot.packs import BUILDERS

    return {name: parse_schema(builder()) for name, builder in BUILDERS.items()}
