import math

import pytest

from schattenlra.verify import SUITES, format_report, run_verify


@pytest.mark.parametrize("name", list(SUITES))
def test_suite_passes(name):
    (res,) = run_verify(name, range(20))
    assert res.trials == 20 and res.failures == 0 and res.status == "pass"
    assert res.worst_slack >= 0


def test_all_selector():
    results = run_verify("all", range(2))
    assert [r.name for r in results] == list(SUITES)


def test_empty_seeds():
    (res,) = run_verify("alt", [])
    assert res.status == "no trials" and res.trials == 0 and math.isnan(res.worst_slack)


def test_unknown():
    with pytest.raises(KeyError, match="unknown suite"):
        run_verify("nope", range(1))


def test_report_lists_every_suite():
    text = format_report(run_verify("all", range(1)))
    assert all(name in text for name in SUITES)
