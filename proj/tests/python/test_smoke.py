import pytest

import cohsim


def test_scheme_parsing():
    assert cohsim.parse_scheme("threshold:2") == "threshold:2"
    assert cohsim.parse_scheme("inv") == "inv"
    with pytest.raises(ValueError):
        cohsim.parse_scheme("bogus")


def test_decide():
    assert cohsim.decide("inv", "S", remote_sharers=3) == "invalidate"
    assert cohsim.decide("upd", "S") == "update"
    assert cohsim.decide("threshold:2", "S", counter=2) == "update"
    assert cohsim.decide("threshold:2", "S", counter=1) == "invalidate"
    assert cohsim.decide("adapted", "O") == "update"
    assert cohsim.decide("adapted", "S") == "invalidate"
    assert cohsim.decide("sharers:2", "S", remote_sharers=2) == "update"
    with pytest.raises(ValueError):
        cohsim.decide("inv", "M")


def test_block_of():
    assert cohsim.block_of(0x1000) == (64, 0, 1)
    assert cohsim.block_of(0x107F) == (65, 1, 1)


def test_engine_stepping():
    eng = cohsim.Engine("inv", cores=2)
    assert eng.step("L", 0, 0x40) == {"kind": "ReadReq", "issuer": 0, "block": 1}
    assert eng.line_state(0, 0x40) == "E"
    assert eng.step("L", 1, 0x40) == {"kind": "ReadReq", "issuer": 1, "block": 1}
    assert eng.line_state(0, 0x40) == "S"
    txn = eng.step("S", 0, 0x40)
    assert txn["kind"] == "InvalidateReq"
    assert eng.line_state(0, 0x40) == "M"
    assert eng.line_state(1, 0x40) == "I"
    assert eng.step("S", 0, 0x40) is None  # silent write from M
    assert eng.steps == 4
    assert eng.check() is None

    totals = eng.metrics()["totals"]
    assert totals["read_reqs"] == 2
    assert totals["invalidates"] == 1
    assert totals["updates"] == 0


def test_update_scheme_keeps_sharers():
    eng = cohsim.Engine("upd", cores=2, verify=True)
    eng.step("L", 1, 0x80)
    txn = eng.step("S", 0, 0x80)
    assert txn["kind"] == "UpdateReq"
    assert eng.line_state(0, 0x80) == "O"
    assert eng.line_state(1, 0x80) == "S"


def test_generate_and_simulate(tmp_path):
    trace = tmp_path / "locks.trace"
    n = cohsim.generate_trace("locks", str(trace), cores=4, refs=3000, seed=9)
    assert n == 3000
    report = cohsim.simulate(str(trace), "threshold:2", verify=True)
    assert report["config"]["cores"] == 4
    assert report["config"]["scheme"] == "threshold:2"
    assert report["totals"]["refs"] == 3000
    assert len(report["per_core"]) == 4
    assert report["totals"]["transactions"] > 0


def test_simulate_missing_file():
    with pytest.raises(cohsim.InputError):
        cohsim.simulate("does-not-exist.trace", "inv")


def test_bad_core_raises():
    eng = cohsim.Engine("inv", cores=2)
    with pytest.raises(cohsim.InputError):
        eng.step("L", 5, 0x40)
