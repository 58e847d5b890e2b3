import json
import os
import subprocess
import sys
import unicodedata
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

import hsprobe

FIXTURES = Path(os.environ.get("HSPROBE_FIXTURES", Path(__file__).parents[1] / "fixtures"))


def codepoints():
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        yield chr(cp)


def test_character_classes_match_unicodedata():
    bad = []
    for ch in codepoints():
        cat = unicodedata.category(ch)
        if hsprobe.is_punctuation(ch) != cat.startswith("P"):
            bad.append(("P", hex(ord(ch))))
        if hsprobe.is_decimal_digit(ch) != (cat == "Nd"):
            bad.append(("Nd", hex(ord(ch))))
        low = ch.lower()
        if len(low) == 1 and hsprobe.to_lower(ch) != low:
            bad.append(("lower", hex(ord(ch))))
    assert bad == []


def test_rouge_and_text():
    assert hsprobe.rouge1("a b c", "a b c") == 1.0
    assert hsprobe.rouge1("a b c", "x y z") == 0.0
    assert hsprobe.rouge1("a b c", "a b d") == pytest.approx(2 / 3, abs=1e-15)
    assert hsprobe.rouge_tokens("Да, ЭТО так!") == ["да", "это", "так"]
    assert hsprobe.intra_group_rouge1(["a b c d e", "a b c x y"]) == pytest.approx(0.6)
    assert hsprobe.normalize_text("(1) Один. (2) Два.") == "Один. Два."


def test_prompt_hash_is_fnv1a():
    assert hsprobe.fnv1a64(b"") == 0xCBF29CE484222325
    assert hsprobe.fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    p = hsprobe.build_prompt("K", "Q?", "A.")
    assert hsprobe.prompt_hash("K", "Q?", "A.") == hsprobe.fnv1a64(p.encode())


@pytest.mark.parametrize("seed", range(10))
def test_tests_agree_with_scipy(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1.0, rng.integers(5, 300))
    b = rng.normal(0.2, rng.uniform(0.5, 2.5), rng.integers(5, 300))
    s = stats.ttest_ind(a, b, equal_var=True)
    w = stats.ttest_ind(a, b, equal_var=False)
    lv = stats.levene(a, b, center="mean")
    lm = stats.levene(a, b, center="median")
    got_s = hsprobe.t_test(a.tolist(), b.tolist(), "student")
    got_w = hsprobe.t_test(a.tolist(), b.tolist(), "welch")
    got_lv = hsprobe.levene(a.tolist(), b.tolist(), "mean")
    got_lm = hsprobe.levene(a.tolist(), b.tolist(), "median")
    assert got_s["t"] == pytest.approx(s.statistic, rel=1e-10)
    assert got_s["p"] == pytest.approx(s.pvalue, rel=1e-8, abs=1e-12)
    assert got_w["p"] == pytest.approx(w.pvalue, rel=1e-8, abs=1e-12)
    assert got_lv["statistic"] == pytest.approx(lv.statistic, rel=1e-10)
    assert got_lv["p"] == pytest.approx(lv.pvalue, rel=1e-8, abs=1e-12)
    assert got_lm["p"] == pytest.approx(lm.pvalue, rel=1e-8, abs=1e-12)
    pr = stats.ttest_rel(a[:5], b[:5])
    assert hsprobe.t_test(a[:5].tolist(), b[:5].tolist(), "paired")["p"] == pytest.approx(
        pr.pvalue, rel=1e-8
    )


def test_hypothesis_picks_welch_on_unequal_variance():
    rng = np.random.default_rng(3)
    r = hsprobe.hypothesis_test(rng.normal(0, 1, 200).tolist(), rng.normal(0, 5, 200).tolist())
    assert r["chosen_test"] == "welch"
    assert not r["levene"]["equal_variances"]


def test_synth_and_analyze(tmp_path):
    hsprobe.synth_bundle(tmp_path / "b", layers=16, pairs=40, separation=1.0, seed=4,
                         weak_layer=9, weak_factor=0.2)
    assert (tmp_path / "b" / "states.bin").stat().st_size == 40 * 10 * 16 * 64 * 4
    out = hsprobe.analyze_bundle(tmp_path / "b", threads=2)
    cats = out["analysis"]["categories"]
    assert cats["own_true"] > cats["cross"] and cats["own_false"] > cats["cross"]
    first = out["layers"]["sequence_criteria"][0]
    assert first["mode"] == 9


def test_cli_pipeline(tmp_path):
    cli = os.environ.get("HSPROBE_CLI")
    run = str(tmp_path / "run")
    steps = [["synth", "--separation", "2"], ["analyze"], ["test"], ["layers"], ["report"]]
    for step in steps:
        args = ["--run-dir", run, "--seed", "9"] + step
        if cli:
            res = subprocess.run([cli] + args, capture_output=True, text=True)
            assert res.returncode == 0, res.stderr
        else:
            code, _, err = hsprobe.run_cli(args)
            assert code == 0, err
    report = json.loads((tmp_path / "run" / "test" / "test_report.json").read_text())
    assert all(r["reject_at_headline"] for r in report["reports"])
    assert (tmp_path / "run" / "reports" / "tables" / "table6.csv").exists()


def test_prepare_fixture_through_module(tmp_path):
    code, out, err = hsprobe.run_cli(
        ["--run-dir", str(tmp_path), "prepare", "--dataset", str(FIXTURES / "mini_muserc.jsonl")]
    )
    assert code == 0, err
    assert out.startswith("2 examples / 2 pairs")
    data, report = hsprobe.select_dataset(FIXTURES / "mini_muserc.jsonl")
    assert report["pairs_out"] == 2
    # no bundle in this run yet
    assert hsprobe.run_cli(["--run-dir", str(tmp_path), "analyze"])[0] != 0


def test_validation_errors_raise():
    with pytest.raises(ValueError):
        hsprobe.t_test([1.0, 2.0], [1.0, 2.0], "bogus")
    with pytest.raises(RuntimeError):
        hsprobe.t_test([1.0], [2.0], "student")
