import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1qubo.encoding import FixedPointEncoding
from l1qubo.errors import ParseError
from l1qubo.gadgets import build_l1_gadget, build_qloss_gadget
from l1qubo.io import (
    gadget_metadata,
    model_from_json,
    model_to_json,
    read_coo,
    read_gadget_metadata,
    read_json,
    read_model,
    write_coo,
    write_json,
    write_model,
)
from l1qubo.qubo import QuboModel


@st.composite
def models(draw):
    n = draw(st.integers(0, 8))
    coef = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
    lin = draw(st.dictionaries(st.integers(0, max(n - 1, 0)), coef)) if n else {}
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    quad = draw(st.dictionaries(st.sampled_from(pairs), coef)) if pairs else {}
    return QuboModel(n, lin, quad, draw(coef))


def roundtrip(model, write, read):
    buf = io.StringIO()
    write(model, buf)
    buf.seek(0)
    return read(buf)


class TestRoundtrip:
    @settings(max_examples=100)
    @given(models())
    def test_json(self, m):
        assert roundtrip(m, write_json, read_json).equals(m)

    @settings(max_examples=100)
    @given(models())
    def test_coo(self, m):
        assert roundtrip(m, write_coo, read_coo).equals(m)

    @pytest.mark.parametrize("name", ["m.json", "m.txt", "m.qubo"])
    def test_files(self, tmp_path, name):
        m = QuboModel(3, {0: 1.5, 2: -0.25}, {(0, 1): 2.0}, 0.125)
        write_model(m, tmp_path / name)
        assert read_model(tmp_path / name).equals(m)

    def test_coo_layout(self):
        buf = io.StringIO()
        write_coo(QuboModel(2, {1: 1.0}, {(0, 1): -2.0}, 3.0), buf)
        assert buf.getvalue() == "n 2\no 3.0\n0 1 -2.0\n1 1 1.0\n"

    def test_json_layout(self):
        obj = model_to_json(QuboModel(2, {1: 1.0}, {(0, 1): -2.0}, 3.0))
        assert obj == {"num_vars": 2, "linear": [[1, 1.0]], "quadratic": [[0, 1, -2.0]], "offset": 3.0}


class TestCoordinateParsing:
    def test_comments_and_normalization(self):
        m = read_coo(io.StringIO("c header\nn 3\n\n2 0 1.5\nc mid\n1 1 -1\n"))
        assert dict(m.quadratic) == {(0, 2): 1.5} and dict(m.linear) == {1: -1.0}

    def test_duplicate_reversed_pair(self):
        with pytest.raises(ParseError, match="line 3"):
            read_coo(io.StringIO("n 3\n0 2 1\n2 0 1\n"))

    def test_duplicate_linear(self):
        with pytest.raises(ParseError, match="line 4"):
            read_coo(io.StringIO("n 2\nc\n1 1 1\n1 1 2\n"))

    @pytest.mark.parametrize(
        "text,line",
        [
            ("n 2\n0 1 nan\n", 2),
            ("n 2\n0 1 inf\n", 2),
            ("n 2\no nan\n", 2),
            ("n 2\n0 5 1\n", 2),
            ("n 2\n0 1\n", 2),
            ("0 1 1\n", 1),
            ("n 2\nn 3\n", 2),
            ("n 2\n0 x 1\n", 2),
        ],
    )
    def test_errors_carry_line(self, text, line):
        with pytest.raises(ParseError) as exc:
            read_coo(io.StringIO(text))
        assert exc.value.line == line and f"line {line}" in str(exc.value)

    def test_missing_header(self):
        with pytest.raises(ParseError):
            read_coo(io.StringIO("c only comments\n"))


class TestJsonParsing:
    def test_nan_constant(self):
        with pytest.raises(ParseError):
            read_json(io.StringIO('{"num_vars": 1, "linear": [[0, NaN]]}'))

    def test_syntax_error_line(self):
        with pytest.raises(ParseError, match="line 3"):
            read_json(io.StringIO('{\n"num_vars": 1,\n"linear": [[0, ]]}'))

    @pytest.mark.parametrize(
        "obj",
        [
            {"num_vars": 2, "quadratic": [[1, 0, 1.0]]},
            {"num_vars": 2, "quadratic": [[0, 1, 1.0], [0, 1, 2.0]]},
            {"num_vars": 2, "linear": [[0, 1.0], [0, 1.0]]},
            {"num_vars": -1},
            {"num_vars": 2, "linear": [[0, "x"]]},
            {"linear": []},
            {"num_vars": 2, "linear": [[5, 1.0]]},
        ],
    )
    def test_malformed(self, obj):
        with pytest.raises((ParseError, ValueError)):
            model_from_json(obj)


class TestGadgetMetadata:
    def test_roundtrip(self):
        g = build_l1_gadget(2.5, 3.1, 5, 10, "l1_naive", t_bits=3)
        meta = json.loads(json.dumps(gadget_metadata(g)))
        variant, M, inp, aux = read_gadget_metadata(meta)
        assert variant == "l1_naive" and M == 10
        assert inp.evaluate(np.zeros(0)) == 2.5
        assert set(aux) == {"t", "z1", "z2"}
        for name, enc in aux.items():
            assert isinstance(enc, FixedPointEncoding)
            assert enc.var_ids == g.aux[name].var_ids and enc.hi == g.aux[name].hi

    def test_qloss_has_no_penalty(self):
        g = build_qloss_gadget(0.5, -1, (-3.0, 4.5, 4))
        assert gadget_metadata(g)["M"] is None
