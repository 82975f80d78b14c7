import math

import pytest

import layoutlab as ll


def bedroom():
    return {
        "id": "smoke",
        "type": "bedroom",
        "width": 4.0,
        "depth": 3.5,
        "objects": [
            {"category": "double_bed", "orientation": 0.0, "width": 1.6, "depth": 2.0, "x": 1.2, "y": 0.0},
            {"category": "nightstand", "orientation": 0.0, "width": 0.4, "depth": 0.4, "x": 0.7, "y": 0.0},
            {"category": "window", "orientation": math.pi, "width": 1.2, "depth": 0.05, "x": 1.4, "y": 3.45},
        ],
    }


def test_categories():
    cats = ll.categories()
    assert cats[0] == "room"
    assert "double_bed" in cats


def test_empty_room_scores_zero():
    r = ll.score({"id": "e", "width": 4.0, "depth": 3.0, "objects": []})
    assert r["score"] == 0.0
    assert all(a["scaled"] is None for a in r["activities"].values())


def test_score_and_gradient_shapes():
    room = bedroom()
    r = ll.score(room)
    assert -0.01 < r["score"] <= 5.0
    assert 0.0 <= r["weight_score"] <= 1.0
    assert len(r["gradient"]) == len(room["objects"]) + 1
    assert all(len(row) == 5 for row in r["gradient"])


def test_intersection_of_coincident_objects():
    room = {"id": "i", "width": 4.0, "depth": 4.0, "objects": [
        {"category": "cabinet", "orientation": 0.0, "width": 1.0, "depth": 1.0, "x": 1.0, "y": 1.0},
        {"category": "wardrobe", "orientation": 0.0, "width": 1.0, "depth": 1.0, "x": 1.0, "y": 1.0},
    ]}
    assert ll.intersection(room)["loss"] == pytest.approx(2 * 8 / 36)


def test_codec_round_trip():
    codec = ll.codec_for(3.0, 6.0, 3.0, 6.0)
    room = bedroom()
    tokens = ll.encode(room, codec)
    r = codec["resolution"]
    assert len(tokens) == 127
    stop = tokens.index(r + 1)
    assert stop == 6 * (len(room["objects"]) + 1)
    assert all(t == r for t in tokens[stop + 1:])
    back = ll.decode(tokens, codec)
    assert len(back["objects"]) == len(room["objects"])
    assert abs(back["width"] - room["width"]) < 6.0 / 254


def test_rule_anchors():
    assert ll._core.reach_cost(0, 0, 0.8, 0) == pytest.approx(0.5, abs=1e-12)
    assert ll._core.rescale(1.0) == pytest.approx(5.0, abs=1e-12)


def test_nucleus():
    assert ll.nucleus_set([0.5, 0.3, 0.15, 0.05], 0.9) == [0, 1, 2]
    assert ll.nucleus_sample([0.0, 1.0, 0.0], 0.9, seed=3) == 1


def test_synth_corpus_and_svg():
    doc = ll.synth_corpus(10, "bedroom", seed=1)
    assert len(doc["rooms"]) == 10
    assert ll.synth_corpus(10, "bedroom", seed=1) == doc
    svg = ll.render_svg(doc["rooms"][0])
    assert svg.startswith("<svg")


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        ll.score({"id": "bad", "width": 4.0, "depth": 3.0, "objects": [{"category": "spaceship"}]})
    with pytest.raises(ValueError):
        ll.synth_corpus(5, "kitchen", 0)
