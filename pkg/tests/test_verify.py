import pytest

from lamx import gmap, verify
from lamx.cli import main


def test_quick_level_passes():
    results = verify.run_checks("quick")
    assert verify.all_passed(results), [r.line() for r in results if not r.passed]


def test_mutation_in_max_tie_handling_is_caught(monkeypatch, tmp_path):
    original = gmap._tie_extreme

    def flipped(active, ders, sign):
        # Max nodes take the smallest tied derivative instead of the largest
        return original(active, ders, -sign if sign > 0 else sign)

    monkeypatch.setattr(gmap, "_tie_extreme", flipped)
    results = {r.name: r for r in verify.run_checks("quick")}
    check = results["gmap_equivariance_derivative"]
    assert not check.passed
    assert "violated: deriv_at_origin" in check.detail
    out = tmp_path / "v.txt"
    assert main(["verify", "--out", str(out)]) == 4
    assert "FAIL" in out.read_text()


def test_unknown_level():
    with pytest.raises(ValueError):
        verify.run_checks("medium")
