import json

import pytest

from branchcrit import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, [json.loads(x) for x in out.splitlines() if x.strip()], err


def test_criterion_true_false(capsys):
    code, rows, _ = run(capsys, "criterion", "--lambda", "1,0,0", "--p", "2", "--i", "1", "--d", "1")
    assert code == 0 and rows[0]["decision"] is True
    code, rows, _ = run(capsys, "criterion", "--lambda", "2,0", "--p", "2", "--i", "1", "--d", "1", "--verify")
    assert code == 0 and rows[0]["decision"] is False


def test_invalid_instance_exit_code(capsys):
    code, _, err = run(capsys, "criterion", "--lambda", "2,0", "--p", "2", "--i", "1", "--d", "2")
    assert code == 2 and "requires d < p" in err
    code, _, err = run(capsys, "operator", "--n", "3", "--p", "2", "--i", "1", "--d", "1", "--set", "2:0,2:1")
    assert code == 2


def test_sets_and_oracle(capsys):
    code, rows, _ = run(capsys, "sets", "--lambda", "1,0,0", "--p", "2", "--i", "1", "--d", "1")
    assert code == 0 and set(rows[0]) >= {"Y", "C", "X"}
    code, rows, _ = run(capsys, "oracle", "--lambda", "1,0,0", "--p", "2", "--i", "1", "--d", "1")
    assert rows[0]["exists"] is True and rows[0]["high_weight_dim"] == 1


def test_operator(capsys):
    code, rows, _ = run(capsys, "operator", "--n", "3", "--p", "2", "--i", "1", "--d", "1", "--set", "2:0")
    assert code == 0 and rows[0] == {"terms": [[[0, 1, 0], "1"]]}
    code, rows, _ = run(capsys, "operator", "--lambda", "1,0,0", "--p", "2", "--i", "1", "--d", "1", "--set", "2:0")
    assert rows[0] == {"terms": [[[0, 1, 0], 1]]}


def test_crosscheck_config_and_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# small sweep\nn = 3\nheight = 2\nprimes = 2,3\nmode = random\ncount = 15\nseed = 5\n")
    monkeypatch.setenv(cli.SEED_ENV, "11")
    code, rows, err = run(capsys, "crosscheck", "--config", str(cfg))
    assert code == 0 and "0 mismatches" in err
    summary = rows[-1]["summary"]
    assert summary["instances"] == 15 and summary["seed"] == 11
    assert all(r["ok"] for r in rows[:-1])


def test_read_config_rejects_unknown(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    with pytest.raises(ValueError):
        cli.read_config(str(cfg))


def test_parallel_matches_serial():
    base = dict(n_values=[3], height=3, primes=[2, 3])
    key = lambda r: (r["lambda"], r["p"], r["i"], r["d"])
    strip = lambda rows: sorted(({k: v for k, v in r.items() if k != "seconds"} for r in rows), key=key)
    a = cli.run_sweep(cli.SweepConfig(**base, jobs=1))
    b = cli.run_sweep(cli.SweepConfig(**base, jobs=2))
    assert strip(a) == strip(b)


def test_mismatch_exit_code(capsys, monkeypatch):
    real = cli.decide_fast

    class Flipped:
        def __init__(self, r):
            self.decision = not r.decision

    monkeypatch.setattr(cli, "decide_fast", lambda inst: Flipped(real(inst)))
    code, _, err = run(capsys, "crosscheck", "--n", "2", "--height", "2", "--primes", "2")
    assert code == 1 and "MISMATCH" in err
