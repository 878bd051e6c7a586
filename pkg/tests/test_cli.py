import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from berezin.cli import main
from berezin.documents import (matrix_from_document, matrix_to_document, operator_from_document,
                               operator_to_document)
from berezin.errors import DocumentError
from berezin.rkhs import HARDY, AnalyticPolynomial, FiniteRankOperator, SpaceSpec, berezin_transform


def op_doc(g, h, kind="hardy", **space):
    pair = lambda c: [[float(np.real(x)), float(np.imag(x))] for x in c]
    return {"space": {"kind": kind, **space}, "terms": [{"g": pair(g), "h": pair(h)}]}


def mat_doc(a):
    a = np.asarray(a, dtype=complex)
    return {"rows": a.shape[0], "cols": a.shape[1], "data": [[z.real, z.imag] for z in a.ravel()]}


@pytest.fixture
def write(tmp_path):
    def _write(name, doc):
        p = tmp_path / name
        p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(p)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    manifest = json.loads(lines[0][2:])["manifest"]
    rows = list(csv.reader(lines[1:]))
    return manifest, rows[0], rows[1:]


class TestDocuments:
    def test_operator_round_trip(self):
        op = FiniteRankOperator(HARDY, (([1, 2j], [0, 1]), ([0.5], [0, 0, 3 - 1j])))
        back = operator_from_document(json.loads(json.dumps(operator_to_document(op))))
        assert back == op

    def test_finite_space(self):
        op = operator_from_document(op_doc([1, 0], [0, 1], kind="finite", dim=2))
        assert op.space == SpaceSpec("finite", 2)

    def test_space_override(self):
        op = operator_from_document(op_doc([0, 1], [0, 1]), "bergman")
        assert op.space.kind == "bergman"

    @pytest.mark.parametrize("doc", [
        [], {"terms": []}, {"space": {"kind": "hardy"}, "terms": []},
        {"space": {"kind": "nope"}, "terms": [{"g": [], "h": []}]},
        {"space": {"kind": "hardy"}, "terms": [{"g": [[1]], "h": []}]},
        {"space": {"kind": "hardy"}, "terms": [{"g": [["a", 0]], "h": []}]},
        {"space": {"kind": "hardy"}, "terms": [{"g": [[1, 0]]}]},
        {"space": {"kind": "finite"}, "terms": [{"g": [[1, 0]], "h": [[1, 0]]}]},
        {"space": {"kind": "finite", "dim": 1}, "terms": [{"g": [[1, 0], [1, 0]], "h": [[1, 0]]}]},
    ])
    def test_operator_errors(self, doc):
        with pytest.raises(DocumentError):
            operator_from_document(doc)

    def test_matrix_round_trip(self):
        a = np.array([[1, 2j], [3, 4 - 1j]])
        assert np.array_equal(matrix_from_document(matrix_to_document(a)), a)
        # row-major
        assert matrix_to_document(a)["data"][1] == [0.0, 2.0]

    @pytest.mark.parametrize("doc", [{"rows": 2, "cols": 2, "data": [[1, 0]]},
                                     {"rows": 0, "cols": 0, "data": []},
                                     {"rows": True, "cols": 1, "data": [[1, 0]]},
                                     {"rows": 1, "cols": 1, "data": [[float("nan"), 0]]}])
    def test_matrix_errors(self, doc):
        with pytest.raises(DocumentError):
            matrix_from_document(doc)


class TestRange:
    def test_interval_example(self, capsys, write):
        code, out, _ = run(capsys, "range", "--op", write("k.json", op_doc([0, 1], [0, 1])))
        assert code == 0
        man, header, rows = read_csv(out)
        assert header == ["lambda_re", "lambda_im", "value_re", "value_im"]
        assert len(rows) == 51200
        vals = np.array(rows, dtype=float)
        assert np.all(vals[:, 3] == 0)
        assert vals[:, 2].max() == pytest.approx(0.25, abs=1e-5)
        assert man["command"] == "range" and man["parameters"]["grid-r"] == 200

    def test_nonconvex_negative_real_parts(self, capsys, write):
        code, out, _ = run(capsys, "range", "--op", write("n.json", op_doc([1, 1], [1, 0, 1])),
                           "--grid-r", "40", "--grid-theta", "64")
        vals = np.array(read_csv(out)[2], dtype=float)
        assert code == 0 and len(vals) == 2560 and vals[:, 2].min() < 0

    def test_values_round_trip(self, capsys, write):
        op = op_doc([1, 0.5j], [0.2, 1])
        code, out, _ = run(capsys, "range", "--op", write("o.json", op), "--grid-r", "5", "--grid-theta", "7")
        rows = np.array(read_csv(out)[2], dtype=float)
        ref = berezin_transform(operator_from_document(op), rows[:, 0] + 1j * rows[:, 1])
        assert np.array_equal(rows[:, 2] + 1j * rows[:, 3], ref)

    def test_zero_op(self, capsys, write):
        code, out, _ = run(capsys, "range", "--op", write("z.json", op_doc([0], [1])), "--grid-r", "3",
                           "--grid-theta", "3")
        assert np.all(np.array(read_csv(out)[2], dtype=float)[:, 2:] == 0)

    def test_json_and_out_file(self, capsys, write, tmp_path):
        out_file = tmp_path / "r.json"
        code, out, _ = run(capsys, "range", "--op", write("k.json", op_doc([0, 1], [0, 1])), "--grid-r", "2",
                           "--grid-theta", "2", "--format", "json", "--out", str(out_file))
        assert code == 0 and out == ""
        doc = json.loads(out_file.read_text())
        assert len(doc["rows"]) == 4 and "manifest" in doc

    def test_deterministic_bytes(self, capsys, write):
        p = write("k.json", op_doc([1, 1], [1, 0, 1]))
        a = run(capsys, "range", "--op", p, "--grid-r", "10", "--grid-theta", "10")[1]
        b = run(capsys, "range", "--op", p, "--grid-r", "10", "--grid-theta", "10")[1]
        assert a == b and "timestamp" not in a


class TestRadius:
    def test_monomial(self, capsys, write):
        code, out, _ = run(capsys, "radius", "--op", write("m.json", op_doc([0, 0, 1], [0, 0, 1])))
        rep = json.loads(out)["report"]
        assert code == 0
        assert rep["radius"] == pytest.approx(4 / 27, abs=1e-8)
        assert rep["family"] == "hardy_monomial(2)" and abs(rep["difference"]) <= 1e-8

    def test_constant_symbol(self, capsys, write):
        code, out, _ = run(capsys, "radius", "--op", write("c.json", op_doc([1], [0, 1])))
        assert json.loads(out)["report"]["radius"] == pytest.approx(2 / (3 * np.sqrt(3)), abs=1e-8)

    def test_zero(self, capsys, write):
        code, out, _ = run(capsys, "radius", "--op", write("z.json", op_doc([0], [0])))
        assert json.loads(out)["report"]["radius"] == 0

    def test_finite(self, capsys, write):
        code, out, _ = run(capsys, "radius", "--op", write("f.json", op_doc([0, 2], [0, 1j], "finite", dim=2)))
        rep = json.loads(out)["report"]
        assert rep["radius"] == 2 and rep["argmax"] == [1.0, 0.0]

    def test_csv(self, capsys, write):
        code, out, _ = run(capsys, "radius", "--op", write("m.json", op_doc([0, 1], [0, 1])), "--format", "csv")
        _, header, rows = read_csv(out)
        kv = dict(rows)
        assert header == ["key", "value"] and float(kv["radius"]) == pytest.approx(0.25)


class TestConvexity:
    @pytest.mark.parametrize("space", ["hardy", "bergman"])
    def test_witness(self, capsys, write, space):
        p = write("n.json", op_doc([1, 1], [1, 0, 1]))
        code, out, err = run(capsys, "convexity", "--op", p, "--space", space)
        rep = json.loads(out)["report"]
        assert code == 0 and rep["witness"]["gap"] > 1e-3 and "witness found" in err
        assert run(capsys, "convexity", "--op", p, "--space", space, "--strict")[0] == 4

    def test_no_witness(self, capsys, write):
        code, out, err = run(capsys, "convexity", "--op", write("k.json", op_doc([0, 1], [0, 1])), "--strict")
        assert code == 0 and json.loads(out)["report"]["witness"] is None
        assert "no witness found at tolerance" in err


class TestNumrange:
    def test_constant_diagonal(self, capsys, write):
        code, out, _ = run(capsys, "numrange", "--matrix", write("c.json", mat_doc(np.eye(3) * (2 - 1j))))
        rep = json.loads(out)["report"]
        assert code == 0 and rep["gap"] <= 1e-12
        assert np.allclose(rep["numrange_vertices"], [[2, -1]])

    def test_nilpotent(self, capsys, write):
        code, out, _ = run(capsys, "numrange", "--matrix", write("n.json", mat_doc([[0, 1], [0, 0]])))
        rep = json.loads(out)["report"]
        assert rep["gap"] == pytest.approx(0.5, abs=1e-3)
        assert rep["numerical_radius"] == pytest.approx(0.5) and rep["berezin_radius"] == 0

    def test_ellipse_csv(self, capsys, write):
        from berezin.matrices import convex_hull, elliptic_range_2x2, hausdorff_distance
        a = np.array([[1, 2], [0, 3]])
        code, out, _ = run(capsys, "numrange", "--matrix", write("e.json", mat_doc(a)), "--format", "csv",
                           "--grid-theta", "512")
        _, header, rows = read_csv(out)
        assert header == ["set", "index", "re", "im"]
        pts = np.array([float(r[2]) + 1j * float(r[3]) for r in rows if r[0] == "numrange_vertex"])
        assert hausdorff_distance(convex_hull(pts), elliptic_range_2x2(a).polygon()) <= 1e-4
        assert [r for r in rows if r[0] == "gap"]

    def test_non_square(self, capsys, write):
        doc = {"rows": 1, "cols": 2, "data": [[1, 0], [2, 0]]}
        assert run(capsys, "numrange", "--matrix", write("b.json", doc))[0] == 2


class TestVerify:
    def test_scalar(self, capsys):
        code, out, _ = run(capsys, "verify", "scalar")
        reps = json.loads(out)["report"]["reports"]
        assert code == 0 and all(r["violations"] == 0 for r in reps)

    def test_kato_identity(self, capsys, write):
        code, out, _ = run(capsys, "verify", "kato", "--matrix", write("i.json", mat_doc(np.eye(2))),
                           "--trials", "1", "--dims", "2")
        rep = json.loads(out)["report"]["reports"][0]
        assert code == 0 and rep["worst_margin"] >= 0 and rep["worst_margin"] == 0

    def test_suite_small(self, capsys):
        code, out, _ = run(capsys, "verify", "all", "--trials", "20", "--dims", "2-4", "--format", "csv")
        man, header, rows = read_csv(out)
        assert code == 0
        assert {r[0] for r in rows} >= {"kato", "refined-kato", "radius-bound", "geomean", "mu-bounds"}
        assert man["parameters"]["dims"] == [2, 3, 4] and man["seed"] == 42

    def test_violation_exit(self, capsys, write, monkeypatch):
        import berezin.cli as cli
        from berezin.inequalities import InequalityReport
        monkeypatch.setitem(cli.OPERATOR_SUITES, "kato",
                            lambda t, nu: InequalityReport("kato", 1, 1, -1.0))
        code, _, _ = run(capsys, "verify", "kato", "--matrix", write("i.json", mat_doc(np.eye(2))))
        assert code == 5

    def test_singular_matrix_domain_error(self, capsys, write):
        code, _, err = run(capsys, "verify", "refined-kato", "--matrix", write("s.json", mat_doc(np.diag([1, 0]))))
        assert code == 3 and "singular" in err


class TestErrors:
    def test_missing_file(self, capsys):
        assert run(capsys, "radius", "--op", "/nonexistent.json")[0] == 2

    def test_bad_json(self, capsys, write):
        assert run(capsys, "radius", "--op", write("b.json", "{not json"))[0] == 2

    def test_missing_flag(self, capsys):
        assert run(capsys, "range")[0] == 2

    def test_domain(self, capsys, write):
        p = write("f.json", op_doc([1], [1], "finite", dim=2))
        assert run(capsys, "convexity", "--op", p)[0] == 3
        assert run(capsys, "range", "--op", write("k.json", op_doc([0, 1], [0, 1])), "--rmax", "1.5")[0] == 3

    def test_argparse_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "nonsense"])
        assert exc.value.code == 2


@pytest.mark.skipif(shutil.which("berezin") is None, reason="console script not installed")
def test_console_script(tmp_path):
    p = tmp_path / "k.json"
    p.write_text(json.dumps(op_doc([0, 1], [0, 1])))
    res = subprocess.run(["berezin", "radius", "--op", str(p)], capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["report"]["oracle"] == 0.25
