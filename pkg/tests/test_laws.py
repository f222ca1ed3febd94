import pytest

from ltau.laws import MUTANTS, QUOTIENT, SUITES, run_laws


def test_all_suites_pass():
    report = run_laws(seed=1, count=30)
    assert report.ok, report.lines()
    assert {r.law for r in report.results} == {law for s in SUITES.values() for law in s} | set(QUOTIENT)


def test_report_is_deterministic():
    a = run_laws(seed=5, count=10, suites=["monad", "handling"]).lines()
    b = run_laws(seed=5, count=10, suites=["monad", "handling"]).lines()
    assert a == b


@pytest.mark.parametrize("mutant,law", [
    ("mu-first-branch", "right-unit"),
    ("mu-drop-delay", "delay-mu"),
    ("strength-swap", "str-snd"),
    ("chi-drop-delay", "chi-delay"),
    ("chi-early-box", "chi-op"),
])
def test_mutant_names_violated_law(mutant, law):
    report = run_laws(seed=0, count=40, mutant=mutant)
    assert not report.ok
    assert law in report.violated()
    assert any(law in line and "FAIL" in line for line in report.lines())


def test_every_mutant_is_caught():
    for name in MUTANTS:
        assert not run_laws(seed=0, count=40, mutant=name).ok, name


def test_depth_zero_is_vacuous():
    report = run_laws(depth=0)
    assert report.ok and report.warnings
    assert all(r.passed == 0 for r in report.results)


def test_unknown_mutant():
    with pytest.raises(ValueError):
        run_laws(mutant="nope")


def test_generated_trees_respect_depth_and_grade():
    import random

    from ltau.laws import Setting
    from ltau.trees import fdepth, fgrade

    for i in range(500):
        rng = random.Random(i)
        s = Setting.make(rng, 4, 3)
        g = rng.randint(0, 6)
        ft = s.ftree(g)
        assert fdepth(ft) <= 4 and fgrade(ft) == g
