from randset import suite


def test_lemma_battery_small():
    checks = suite.lemma_battery(3, count=10)
    assert [c.name for c in checks] == [
        "symmetrization", "exp-symmetrization", "desymmetrization",
    ]
    assert all(c.passed for c in checks)


def test_coverage_battery_small():
    checks = suite.coverage_battery(3, count=5, zetas=(0.2,), lambdas=(5.0,))
    assert all(c.passed for c in checks)
    assert {c.name for c in checks} == {
        "coverage-thm13-kl", "coverage-thm13-disintegrated",
        "coverage-thm15-lower",
    }


def test_it_battery_small():
    checks = suite.it_battery(3, count=10)
    assert all(c.passed for c in checks)


def test_calibration_battery_small():
    checks = suite.calibration_battery(3, count=5, draws=20_000)
    assert all(c.passed for c in checks)


def test_batteries_are_seed_deterministic():
    a = suite.lemma_battery(11, count=5)
    b = suite.lemma_battery(11, count=5)
    assert a == b
    c = suite.lemma_battery(12, count=5)
    assert [x.detail for x in c] != [x.detail for x in a]
