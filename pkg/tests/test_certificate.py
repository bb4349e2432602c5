import json
import random

import pytest

from mixedwaring.certificate import (
    cube_identity,
    load_certificate,
    reassemble,
    verify_certificate,
)
from mixedwaring.descent import run_endgame
from mixedwaring.errors import ConstructionError, InputError
from mixedwaring.feasibility import ExponentTuple, plan_route
from mixedwaring.pipeline import RunLog, _descend, represent
from mixedwaring.policy import BoundPolicy
from mixedwaring.ternary import TernarySolution, solve_ternary

from mutations import MUTATIONS, mutated


@pytest.fixture(scope="module")
def cert():
    return represent(10**15 + 7, (6, 6), "grh")


def test_cube_identity():
    rng = random.Random(0)
    for _ in range(200):
        A, z = rng.randrange(1, 10**30), rng.randrange(0, 10**30)
        assert cube_identity(A, z)


def test_roundtrip_passes(cert):
    assert cert.total() == cert.n
    rep = verify_certificate(cert.to_json())
    assert rep.ok and rep.first_failure is None
    assert verify_certificate(json.loads(cert.to_json())).ok


def test_assembly_formulae(cert):
    lam, p = cert.endgame.lam, cert.endgame.p
    v, w, z0 = cert.ternary.x, cert.ternary.y, cert.ternary.z
    assert cert.sqrt_lambda**2 == lam
    assert cert.x == (cert.sqrt_lambda * v, cert.sqrt_lambda * w, lam * p + z0, lam * p - z0)


def test_final_tail_exponents_integral():
    c = represent(10**70 + 11, (6, 12, 12), "grh")
    K = c.working.K
    for w in c.witnesses:
        for j in range(1, c.working.t):
            assert (6 * w.h * K) % c.working.k(j) == 0
    assert verify_certificate(c).ok


@pytest.mark.parametrize("name,apply,expected", MUTATIONS, ids=[m[0] for m in MUTATIONS])
def test_mutation_is_caught(cert, name, apply, expected):
    rep = verify_certificate(mutated(json.loads(cert.to_json()), apply))
    assert not rep.ok
    assert rep.first_failure[0] == expected


@pytest.mark.parametrize(
    "doc",
    [None, 5, "not json", "[]", {"format_version": 1}, {"format_version": 1, "n": "x", "exponents": [], "x": [], "y": []}],
)
def test_hostile_input_never_raises(doc):
    rep = verify_certificate(doc)
    assert not rep.ok and rep.first_failure[0] == "format"


def test_truncated_json_reports_location(cert):
    with pytest.raises(InputError, match="line"):
        load_certificate(cert.to_json()[:200])


def test_reassemble_rejects_bad_ternary():
    work, kind = plan_route(ExponentTuple.of((6, 6)), "grh")
    d = _descend(10**15 + 7, work, kind, BoundPolicy(), RunLog())
    end = run_endgame(d, BoundPolicy(), "grh")
    sol = solve_ternary(end.N, end.p).solution
    with pytest.raises(ConstructionError):
        reassemble(d, end, TernarySolution(sol.x + 1, sol.y, sol.z), "grh", BoundPolicy())
    cert = reassemble(d, end, sol, "grh", BoundPolicy())
    assert cert.total() == 10**15 + 7


def test_relabeled_exponents_map_back():
    c = represent(10**15 + 7, (8, 5), "unconditional")
    assert c.exponents == (8, 5) and c.working.values == (8, 5)
    c2 = represent(10**15 + 7, (5, 8), "unconditional")
    assert c2.exponents == (5, 8) and c2.working.values == (8, 5)
    assert c2.y == (c.y[1], c.y[0])
    assert verify_certificate(c2.to_json()).ok


def test_json_integers_are_strings(cert):
    doc = json.loads(cert.to_json())
    assert isinstance(doc["n"], str) and all(isinstance(v, str) for v in doc["x"])
    assert doc["format_version"] == 1
