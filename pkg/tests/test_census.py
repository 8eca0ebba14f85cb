import csv
import io
import json

import numpy as np
import pytest

from cayley_tisgm import census, tisgm
from cayley_tisgm.model import ModelParams, theta_c0, theta_cm_k2


def P(theta, q=5, k=2):
    return ModelParams(k, q, theta)


@pytest.fixture(scope="module")
def scan():
    return census.critical_scan(P(2.0))


@pytest.mark.parametrize("th,total", [(1.2, 1), (5.0, 1), (6.4, 21), (8.0, 61), (9.0, 93), (12.0, 153),
                                      (20.0, 183)])
def test_totals(th, total):
    assert census.count(th) == total


def test_entries_add_up():
    for th in (6.4, 9.0, 12.0, 20.0):
        r = census.enumerate_tisgm(P(th))
        assert sum(m for _, m in r.entries) == r.total
        assert all(m > 0 for _, m in r.entries)
        assert sum(r.class_counts.values()) >= len(r.entries)


def test_formula_total_matches_where_orbits_are_disjoint():
    # below theta_c0 no orbit overlaps, so both conventions agree
    for th in (1.2, 6.4, 8.0):
        r = census.enumerate_tisgm(P(th))
        assert r.formula_total == r.total
    r = census.enumerate_tisgm(P(12.0))
    assert r.formula_total > r.total


def _all_laws(params):
    sols = list(tisgm.solve_free(params))
    for m in (1, 2):
        sols += tisgm.solve_all(params, m)
    laws = []
    for s in sols:
        for var in ([s] if s.u == s.v else [s, s.swapped()]):
            for sub in ([None] if s.case_tag == "free" else tisgm.subsets(5, s.m)):
                laws.append(tisgm.embed(var, sub, q=5))
    return laws


def _distinct(laws):
    out = []
    for z in laws:
        v = np.log(np.concatenate([z.z_minus, z.z_plus]))
        if not any(np.max(np.abs(v - u)) <= 1e-8 for u in out):
            out.append(v)
    return out


@pytest.mark.parametrize("th", [9.0, 12.0, 20.0])
def test_total_is_number_of_distinct_laws(th):
    params = P(th)
    laws = _all_laws(params)
    assert len(_distinct(laws)) == census.count(th)
    assert all(tisgm.residual(z, params) < 1e-9 * max(1.0, z.as_matrix().max()) for z in laws)


@pytest.mark.parametrize("th", [9.0, 12.0, 20.0])
def test_row_exchange_adds_no_new_law(th):
    laws = _all_laws(P(th))
    base = _distinct(laws)
    both = _distinct(laws + [z.row_swapped() for z in laws])
    assert len(both) == len(base)


def test_partial_for_higher_k():
    r = census.enumerate_tisgm(P(40.0, 4, 3))
    assert r.partial
    assert r.total >= 3
    assert not census.enumerate_tisgm(P(12.0)).partial


def test_counts_around_first_critical_value():
    th = theta_c0(2, 5)
    assert census.count(th - 1e-6) == 101
    assert census.count(th) == 51
    assert census.count(th + 1e-6) == 93


# critical scan

SCAN = [1.23205, 1.55036, 1.55872, 5.84161, 6.33597, 7.78975, 8.33761, 8.35890, 9.89898, 10.36329,
        11.71258, 11.77561, 11.91608, 12.93003, 13.93047]


def test_scan_values(scan):
    got = [c.theta for c in scan]
    assert got == pytest.approx(SCAN, abs=1e-4)


def test_scan_count_changes(scan):
    changes = [c.theta for c in scan if c.changes_count]
    assert changes == pytest.approx(SCAN[4:], abs=1e-4)


def test_scan_cluster_at_theta_c0(scan):
    c = next(c for c in scan if abs(c.theta - theta_c0(2, 5)) < 1e-3)
    assert len(set(c.cluster)) >= 3
    assert "theta_c0" in c.cluster


def test_scan_includes_closed_forms(scan):
    for ref in (theta_cm_k2(1, 5), theta_cm_k2(2, 5), 6 + np.sqrt(35)):
        assert min(abs(c.theta - ref) for c in scan) < 1e-6


def test_unmerged_scan_has_more_events(scan):
    raw = census.critical_scan(P(2.0), merge_tol=0.0, check_counts=False)
    assert len(raw) >= 12
    assert len(raw) > len(scan)


def test_merge_events():
    ev = [(1.0, "a"), (1.0005, "b"), (1.01, "c")]
    merged = census.merge_events(ev, 1e-3)
    assert [len(c) for c in merged] == [2, 1]
    assert len(census.merge_events(ev, 0.0)) == 3


def test_scan_subrange():
    cs = census.critical_scan(P(2.0), 9.0, 11.0, check_counts=False)
    assert [round(c.theta, 4) for c in cs] == [9.899, 10.3633]


# lower bounds

def test_lower_bound_examples():
    assert census.lower_bound_counts(5, True, "cold") == 33
    assert census.lower_bound_counts(5, False, "cold") == 31
    assert census.lower_bound_counts(5, True, "at_cr") == 18
    assert census.lower_bound_counts(5, True, "high") == 1
    assert census.lower_bound_counts(4, True, "at_cr") == 2 ** 3 - 3 + 2


def test_lower_bound_errors():
    with pytest.raises(ValueError):
        census.lower_bound_counts(5, True, "between")
    with pytest.raises(ValueError):
        census.lower_bound_counts(5, True, "lukewarm")
    with pytest.raises(ValueError):
        census.lower_bound_counts(5, False, "at_cm", 3)


def test_regime_of():
    assert census.regime_of(P(5.0)) == ("high", None)
    assert census.regime_of(P(9.0)) == ("between", 0)
    assert census.regime_of(P(10.0)) == ("between", 1)
    assert census.regime_of(P(15.0)) == ("cold", None)
    assert census.regime_of(P(6 + np.sqrt(35))) == ("at_cr", None)
    assert census.regime_of(P(theta_cm_k2(1, 5))) == ("at_cm", 1)
    assert census.regime_of(P(0.01)) == ("cold", None)


@pytest.mark.parametrize("th", [0.01, 0.05, 0.1, 0.5, 1.2, 5.0, 8.5, 9.5, 10.5, 11.8, 12.5, 15.0, 20.0])
def test_total_respects_lower_bound(th):
    params = P(th)
    regime, m = census.regime_of(params)
    assert census.count(th) >= census.lower_bound_counts(5, th > 1, regime, m)


# serialisation

def test_json_and_csv():
    r = census.enumerate_tisgm(P(12.0))
    data = json.loads(census.to_json(r))
    assert data[0]["total"] == 153
    assert sum(e["multiplicity"] for e in data[0]["entries"]) == 153
    rows = list(csv.DictReader(io.StringIO(census.to_csv(r))))
    assert len(rows) == len(r.entries)
    assert set(rows[0]) == {"theta", "m", "case_tag", "branch", "u", "v", "w", "multiplicity"}
    assert sum(int(x["multiplicity"]) for x in rows) == 153


def test_critical_value_needs_members():
    with pytest.raises(ValueError):
        census.CriticalValue(1.0, "x", ())
