import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fexpand.pdeparse import parse_pde
from fexpand.verify import (
    NONZERO_TOL, ZERO_TOL, Fixture, VerifyError, bundled_corpus, parse_solution, relation,
    verify_corpus, verify_solution,
)

from conftest import BURGER_FISHER, fkdv_member

BF = parse_pde(BURGER_FISHER)
CORPUS = bundled_corpus()
BY_ID = {f.id: f for f in CORPUS}


def check(text, params=(), relations=(), p=BF, samples=8):
    return verify_solution(parse_solution(text, params, relations), p, samples=samples)


def test_constant_solution():
    rep = check("1")
    assert rep.is_zero
    assert len(rep.residual) == 0


def test_epsilon_kink_with_relation():
    rep = check("1/2 + (eps/2)*tanh(eps/2*t)", ("eps",), ["eps^2=1"])
    assert rep.is_zero
    assert rep.max_sample() < ZERO_TOL


def test_wrong_candidate_is_nonzero():
    rep = check("tanh(x)")
    assert not rep.is_zero
    assert len(rep.residual) > 0
    assert rep.max_sample() > NONZERO_TOL


def test_exp_realization():
    assert check("1 + a*exp(t + x)", ("a",)).is_zero


def test_sinh_cosh_realization():
    assert check("a*(sinh(t + 1/2*x) + cosh(t + 1/2*x))^2", ("a",)).is_zero


def test_symbolic_parameters_preserved():
    fx = BY_ID["sk-u4-corrected"]
    p, sol = fx.build()
    assert {s.name for s in sol.free} == {"a0", "beta"}
    assert verify_solution(sol, p, samples=8).is_zero


def test_printed_sk_phase_is_a_misprint():
    fx = BY_ID["sk-u4"]
    assert fx.discrepancy
    p, sol = fx.build()
    rep = verify_solution(sol, p, samples=8)
    assert not rep.is_zero
    assert rep.max_sample() > NONZERO_TOL


def test_square_root_extension():
    fx = BY_ID["kawahara-u2"]
    assert "s^2=13" in fx.relations
    p, sol = fx.build()
    assert verify_solution(sol, p, samples=4).is_zero


def test_relation_requires_nonzero_rational():
    with pytest.raises(VerifyError):
        relation("s^2=0", {})


def test_phase_must_be_affine():
    with pytest.raises((VerifyError, ValueError)):
        check("tanh(t*x)")


def test_ito_corpus():
    ito = [f for f in CORPUS if f.group == "ito"]
    summary = verify_corpus(ito, samples=0)
    assert len(summary) == len(ito) == 7
    assert all(r.verdict == "zero" for r in summary.results)


def test_empty_corpus():
    summary = verify_corpus([])
    assert len(summary) == 0
    assert summary.exit_status == 0


def test_planted_sign_error():
    ito = [f for f in CORPUS if f.group == "ito"]
    bad = dataclasses.replace(ito[1], id="ito-u2-bad",
                              solution=ito[1].solution.replace("- 6*beta^2", "+ 6*beta^2"))
    summary = verify_corpus(ito + [bad], samples=0)
    assert [r.fixture.id for r in summary.failures] == ["ito-u2-bad"]
    assert summary.exit_status == 1


def test_whitelisted_failure_does_not_fail_corpus():
    summary = verify_corpus([BY_ID["sk-u4"], BY_ID["sk-u1"]], samples=0)
    assert len(summary.failures) == 1
    assert summary.unexpected_failures == []
    assert summary.exit_status == 0


def test_fixture_json_round_trip():
    for fx in CORPUS:
        assert Fixture.from_json(fx.to_json()) == fx


def test_corpus_covers_every_group():
    groups = {f.group for f in CORPUS}
    assert {"burgers-fisher-tanh", "burgers-fisher-sinh-cosh", "kawahara", "sk", "cdg", "lax",
            "kk", "ito"} <= groups
    assert sum(f.group == "burgers-fisher-tanh" for f in CORPUS) == 14


# epsilon branches: symbolic eps under eps^2 = 1 iff both concrete branches

EPS_IDS = sorted(f.id for f in CORPUS if f.group == "burgers-fisher-eps")


@pytest.mark.parametrize("fid", EPS_IDS)
def test_epsilon_branch_equivalence(fid):
    fx = BY_ID[fid]
    symbolic = verify_solution(*reversed(fx.build()), samples=0).is_zero
    branches = []
    for e in ("1", "-1"):
        sol = parse_solution(fx.solution.replace("eps", f"({e})"))
        branches.append(verify_solution(sol, BF, samples=0).is_zero)
    assert symbolic == all(branches)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(EPS_IDS), st.fractions(-3, 3, max_denominator=4).filter(lambda q: q != 0))
def test_epsilon_perturbation_detected(fid, delta):
    # shifting the constant term breaks every branch at once
    fx = BY_ID[fid]
    sol = parse_solution(f"{fx.solution} + ({delta.numerator}/{delta.denominator})", fx.params,
                         fx.relations)
    assert not verify_solution(sol, BF, samples=0).is_zero


def test_fifth_order_member_helper():
    assert parse_pde(fkdv_member("sk")).lhs == BY_ID["sk-u1"].build()[0].lhs
