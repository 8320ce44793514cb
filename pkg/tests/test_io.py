import json
import warnings

import numpy as np
import pytest

from electre_tree import ElicitationSpec, TriBParameters, ValidationError
from electre_tree.datasets import dataset1_path, load_esl
from electre_tree.core import ElectreTreeError
from electre_tree.io import (RunConfig, build_spec, default_class_names, ensemble_from_dict,
                             ensemble_to_dict, load_ensemble, load_matrix,
                             load_new_alternatives, load_params, matrix_to_csv, parse_labels,
                             read_table)
from electre_tree.pipeline import (accuracy_histogram, boundary_grid, run_classify,
                                   run_elicit)

CSV = "id,a,b\nr1,1,10\nr2,3,20\nr3,5,30\n"
SMALL = dict(n_models=4, ga={"generations": 3, "population_size": 6})


def test_minmax_max_and_min():
    cfg = RunConfig(normalization="minmax", directions={"b": "min"})
    m, lab, _ = load_matrix(CSV, cfg)
    assert m.values[:, 0].tolist() == [0, 0.5, 1]
    assert m.values[:, 1].tolist() == [1, 0.5, 0]
    assert lab is None


def test_min_without_normalization_negates():
    m, _, _ = load_matrix(CSV, RunConfig(directions={"a": "min"}))
    assert m.values[:, 0].tolist() == [-1, -3, -5]


def test_dataset1_matches_table(dataset1):
    m, lab = dataset1
    assert m.shape == (64, 2)
    assert m.values[0].tolist() == [1, 1]
    assert m.values[63].tolist() == [26, 18]
    assert np.bincount(lab.labels).tolist() == [16, 16, 16, 16]
    blocks = {0: (1, 1), 1: (16, 8), 2: (23, 8), 3: (23, 15)}
    for c, (x0, y0) in blocks.items():
        pts = m.values[lab.labels == c]
        assert pts.min(0).tolist() == [x0, y0] and pts.max(0).tolist() == [x0 + 3, y0 + 3]


@pytest.mark.parametrize("text,msg", [
    ("id,a,b\nr1,1,x\nr2,2,3\n", "non-numeric value 'x' at row 'r1', column 'b'"),
    ("id,a,b\nr1,1\n", "line 2 has 2 fields"),
    ("id,a,a\nr1,1,2\n", "duplicate"),
    ("id,a,b\nr1,1,2\nr2,1,3\n", "constant column 'a'"),
])
def test_ingestion_errors(text, msg):
    with pytest.raises(ValidationError, match=msg):
        load_matrix(text, RunConfig(normalization="minmax"))


def test_missing_label_column():
    with pytest.raises(ValidationError, match="missing labels column"):
        load_matrix(CSV, RunConfig(labels_column="cls"))


def test_unknown_direction():
    with pytest.raises(ValidationError):
        load_matrix(CSV, RunConfig(directions={"zz": "min"}))


def test_labels_parsing():
    lab = parse_labels(["A", "C", "", "0"], ["A", "B", "C"])
    assert lab.labels.tolist() == [2, 0, -1, 0]
    with pytest.raises(ValidationError, match="unknown class label 'Z'"):
        parse_labels(["Z"], ["A", "B"])


def test_class_names():
    assert default_class_names(3) == ["A", "B", "C"]
    assert len(default_class_names(30)) == 30


def test_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(classes=1)
    with pytest.raises(ValidationError):
        RunConfig(sample_fraction=0)
    with pytest.raises(ValidationError):
        RunConfig(reference="labels")
    with pytest.raises(ValidationError):
        RunConfig.from_dict({"bogus": 1})


def test_config_roundtrip(tmp_path):
    cfg = RunConfig(data="d.csv", classes=4, directions={"a": "min"}, n_models=7,
                    elicitation={"v": "none", "q": {"free": [0, 2]}}, trim=0.5,
                    ga={"generations": 4, "seed": 3})
    d = cfg.to_dict()
    assert RunConfig.from_dict(json.loads(json.dumps(d))).to_dict() == d
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(d))
    assert RunConfig.from_file(p).data == str(tmp_path / "d.csv")


def test_build_spec_lambda_key(dataset1):
    m, _ = dataset1
    spec = build_spec(m, RunConfig(classes=4, elicitation={"lambda": 0.8, "v": "none"}))
    assert spec.lower[-1] == spec.upper[-1] == 0.8


def test_read_table_path_and_text(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text(CSV)
    assert read_table(p).ids == read_table(CSV).ids == ["r1", "r2", "r3"]


def test_matrix_csv_roundtrip(dataset1):
    m, lab = dataset1
    text = matrix_to_csv(m, lab, ["A", "B", "C", "D"])
    m2, lab2, _ = load_matrix(text, RunConfig(classes=4, labels_column="label"))
    assert np.array_equal(m2.values, m.values)
    assert m2.alternatives == m.alternatives
    assert np.array_equal(lab2.labels, lab.labels)


def test_params_file(tmp_path, merged_reference):
    p = tmp_path / "p.json"
    d = merged_reference.to_dict()
    d["v"] = ["inf", 5.68]
    p.write_text(json.dumps(d))
    got = load_params(p)
    assert np.isinf(got.v[0]) and got.lam == 0.76
    (tmp_path / "bad.json").write_text("{}")
    with pytest.raises(ValidationError):
        load_params(tmp_path / "bad.json")


def test_esl_unavailable(monkeypatch):
    monkeypatch.delenv("ELECTRE_TREE_ESL", raising=False)
    with pytest.raises(ElectreTreeError, match="ESL data unavailable"):
        load_esl()


@pytest.fixture(scope="module")
def elicited(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = RunConfig(data=str(dataset1_path()), classes=4, labels_column="class",
                    elicitation={"v": "none"}, seed=5, **SMALL)
    return run_elicit(cfg, out), out


def test_elicit_outputs(elicited):
    res, out = elicited
    report = (out / "report.txt").read_text()
    for section in ("[Parameters]", "[Accuracy]", "[Histogram]", "[Votes]"):
        assert section in report
    for row in ("weights,", "indifference,", "preference,", "veto,", "profile 1,",
                "profile 3,", "lambda,", "merged_accuracy,", "vote_accuracy,"):
        assert row in report
    assert sum(c for _, c in accuracy_histogram(res.ensemble.accuracies)) == 4
    assert res.ensemble.models[0].params.v.tolist() == [np.inf, np.inf]
    assert "inf" in (out / "ensemble.json").read_text()
    json.loads((out / "ensemble.json").read_text())


def test_ensemble_roundtrip(elicited):
    res, out = elicited
    saved = load_ensemble(out / "ensemble.json")
    assert ensemble_to_dict(saved) == ensemble_to_dict(res.saved)
    again = ensemble_from_dict(json.loads(json.dumps(ensemble_to_dict(saved), default=str)))
    for a, b in zip(again.ensemble.models, res.ensemble.models):
        assert np.array_equal(a.params.to_genes(), b.params.to_genes())
    assert again.ensemble.spec == res.ensemble.spec


def test_bad_ensemble_file(tmp_path):
    p = tmp_path / "e.json"
    p.write_text(json.dumps({"format": "other"}))
    with pytest.raises(ValidationError):
        load_ensemble(p)


def test_classify_training_rows(elicited):
    res, out = elicited
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cl = run_classify(out / "ensemble.json", dataset1_path())
    assert np.array_equal(cl.votes.counts, res.votes.counts)
    assert np.array_equal(cl.merged_classes, res.merged_classes)


def test_classify_new_rows(elicited):
    res, out = elicited
    text = "id,g2,g1,extra\nn1,1,1,z\nn2,500,500,z\n"
    with pytest.warns(UserWarning, match="differs"):
        cl = run_classify(out / "ensemble.json", text)
    assert cl.merged_classes.tolist()[1] == 3
    assert cl.table.splitlines()[0] == "id,A,B,C,D,vote,merged"
    with pytest.warns(UserWarning):
        same = run_classify(out / "ensemble.json", "id,g1,g2\nn1,1,1\nn2,26,18\n")
    assert np.array_equal(same.votes.counts[0], res.votes.counts[0])
    assert np.array_equal(same.votes.counts[1], res.votes.counts[63])


def test_classify_schema_mismatch(elicited):
    _, out = elicited
    with pytest.raises(ValidationError, match="missing criteria: g2"):
        run_classify(out / "ensemble.json", "id,g1\nn1,1\n")


def test_fixed_single_model_report(tmp_path, merged_reference):
    t = merged_reference
    decl = {"weights": t.weights.tolist(), "q": t.q.tolist(), "p": t.p.tolist(),
            "v": t.v.tolist(), "profiles": t.profiles.tolist(), "lambda": t.lam}
    cfg = RunConfig(data=str(dataset1_path()), classes=4, labels_column="class",
                    elicitation=decl, n_models=1)
    res = run_elicit(cfg, tmp_path)
    assert np.array_equal(res.merged.to_genes(), t.to_genes())
    assert "weights,0.52,0.49" in res.report
    assert "profile 2,17.12,10.68" in res.report
    assert "lambda,0.76" in res.report
    grid = boundary_grid(res.saved, "g1", "g2", 20)
    assert np.array_equal(grid.vote_class, grid.merged_class)


def test_boundary_shape_and_errors(elicited, merged_reference):
    res, out = elicited
    g = boundary_grid(out / "ensemble.json", "g1", "g2", 2)
    assert len(g.x) == 4 and g.shape == (2, 2)
    assert g.to_csv().splitlines()[0] == "x,y,vote_class,merged_class"
    with pytest.raises(ValidationError, match="unknown criterion"):
        boundary_grid(res.saved, "g1", "nope", 5)
    with pytest.raises(ValidationError):
        boundary_grid(res.saved, "g1", "g2", 1)
    bare = boundary_grid(merged_reference, "g1", "g2", 5, criteria=["g1", "g2"],
                         ranges=([0, 0], [10, 10]))
    assert bare.x.min() == 0 and bare.y.max() == 10


def test_new_alternatives_use_training_scaling(tmp_path):
    cfg = RunConfig(normalization="minmax")
    _, _, norm = load_matrix(CSV, cfg)
    m = load_new_alternatives("id,a,b\nn,3,40\nz,1,10\n", norm)
    assert m.values.tolist() == [[0.5, 1.5], [0, 0]]


def test_spec_from_config_matches_direct(dataset1):
    m, _ = dataset1
    a = build_spec(m, RunConfig(classes=4, elicitation={"q": 0}))
    assert a == ElicitationSpec.from_matrix(m, 4, q=0)


def test_params_dict_shape(merged_reference):
    d = merged_reference.to_dict()
    assert set(d) == {"weights", "q", "p", "v", "profiles", "lambda"}
    assert TriBParameters.from_dict(d).lam == 0.76
