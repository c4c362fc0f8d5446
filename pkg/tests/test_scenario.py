import copy
import json

import numpy as np
import pytest

from conftest import entangled_input
from qgames.analysis import FormLabel, classify
from qgames.engine import expected_payoffs
from qgames.errors import ValidationError
from qgames.scenario import bundled_names, load_scenario, parse_real, parse_scenario

BASE = {
    "schema_version": 1,
    "name": "doc",
    "subsystem_dims": [2, 2],
    "input_state": [{"label": "00", "prob": "3/5"}, {"label": "11", "prob": "2/5"}],
    "alice_ops": [{"name": "I", "gate": "I"}, {"name": "F", "gate": "F"}],
    "bob_ops": [{"name": "I", "gate": "I"}, {"name": "F", "gate": "F"}],
    "outcomes": {"00": [3, 3], "01": [0, 5], "10": [5, 0], "11": [1, 1]},
}


def doc_with(**changes) -> str:
    d = copy.deepcopy(BASE)
    d.update(changes)
    return json.dumps(d)


class TestParseReal:
    @pytest.mark.parametrize("text,value", [
        ("3/5", 0.6), ("-0.25", -0.25), ("sqrt(2/5)", np.sqrt(0.4)), ("-sqrt(1/2)", -np.sqrt(0.5)),
        (2, 2.0), ("1e-3", 1e-3),
    ])
    def test_values(self, text, value):
        assert parse_real(text) == pytest.approx(value, abs=1e-16)

    def test_exact_rational(self):
        assert parse_real("1/3") == 1 / 3

    @pytest.mark.parametrize("bad", ["abc", "1/0", True, None, "sqrt(-1)"])
    def test_rejects(self, bad):
        with pytest.raises(ValidationError):
            parse_real(bad)


class TestBundled:
    def test_names(self):
        assert bundled_names() == sorted([
            "ewl_bell_entangler", "family_a00_d11", "family_b01_c10", "pd_classical",
            "pd_correlated_noise", "pd_dephased_3_5", "pd_entangled_3_5", "pd_independent_noise",
        ])

    @pytest.mark.parametrize("name", bundled_names())
    def test_strict_parse(self, name):
        doc = load_scenario(name, strict=True)
        assert doc.name == name
        assert doc.game().n >= 2

    def test_pd_classical(self):
        pm = expected_payoffs(load_scenario("pd_classical").game())
        np.testing.assert_array_equal(pm.cells, [[[3, 3], [0, 5]], [[5, 0], [1, 1]]])

    def test_entangled_state(self):
        doc = load_scenario("pd_entangled_3_5")
        assert doc.spec.input_state.fidelity(entangled_input()) == pytest.approx(1, abs=1e-15)
        np.testing.assert_allclose(doc.spec.input_state.amps, entangled_input().amps, atol=1e-16)

    def test_family_parameter(self):
        doc = load_scenario("family_a00_d11")
        assert doc.family_p == pytest.approx(0.6)
        assert classify(expected_payoffs(doc.game(0.62))).label is FormLabel.CHICKEN
        assert classify(expected_payoffs(doc.game(0.9))).label is FormLabel.PRISONERS_DILEMMA

    def test_param_without_family(self):
        with pytest.raises(ValidationError, match="family"):
            load_scenario("pd_classical").game(0.5)

    def test_load_path(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text(doc_with(name="x"), encoding="utf-8")
        assert load_scenario(path).name == "x"

    def test_missing(self):
        with pytest.raises(ValidationError, match="no such file"):
            load_scenario("does_not_exist")


class TestValidation:
    def test_row_sum_point_nine_operator(self):
        bad = [[0.9, 0], [0, 1]]
        text = doc_with(alice_ops=[{"name": "I", "gate": "I"}, {"name": "Leaky", "matrix": bad}])
        with pytest.raises(ValidationError) as err:
            parse_scenario(text)
        assert "alice_ops[1]" in err.value.field and "Leaky" in err.value.field
        assert "unitary" in err.value.message

    def test_not_normalized(self):
        with pytest.raises(ValidationError, match="normalized"):
            parse_scenario(doc_with(input_state=[{"label": "00", "prob": "3/5"}]))

    def test_near_normalized_accepted(self):
        doc = parse_scenario(doc_with(input_state=[{"label": "00", "prob": 0.6 + 5e-10},
                                                   {"label": "11", "prob": 0.4}]))
        assert np.linalg.norm(doc.spec.input_state.amps) == pytest.approx(1, abs=1e-15)

    def test_missing_field(self):
        d = copy.deepcopy(BASE)
        del d["outcomes"]
        with pytest.raises(ValidationError) as err:
            parse_scenario(json.dumps(d))
        assert "outcomes" in err.value.message

    def test_bad_dims(self):
        with pytest.raises(ValidationError) as err:
            parse_scenario(doc_with(subsystem_dims=[2, 0]))
        assert err.value.field == "subsystem_dims[1]"

    def test_unknown_field_strict_only(self):
        text = doc_with(comment="hello")
        with pytest.raises(ValidationError):
            parse_scenario(text, strict=True)
        assert parse_scenario(text, strict=False).name == "doc"

    def test_unknown_label(self):
        with pytest.raises(ValidationError) as err:
            parse_scenario(doc_with(input_state=[{"label": "22", "prob": 1}]))
        assert err.value.field == "input_state[0].label"

    def test_outcome_labels_must_match(self):
        with pytest.raises(ValidationError, match="missing"):
            parse_scenario(doc_with(outcomes={"00": [1, 1]}))

    def test_invalid_json(self):
        with pytest.raises(ValidationError, match="invalid JSON"):
            parse_scenario("{not json")

    def test_not_utf8(self):
        with pytest.raises(ValidationError, match="UTF-8"):
            parse_scenario(b"\xff\xfe")

    def test_local_dim_mismatch(self):
        with pytest.raises(ValidationError) as err:
            parse_scenario(doc_with(bob_ops=[{"name": "J", "scope": "local_B", "matrix": np.eye(4).tolist()}]))
        assert "bob_ops[0]" in err.value.field

    def test_complex_entries(self):
        s = "sqrt(1/2)"
        ops = [{"name": "S", "matrix": [[1, 0], [0, {"re": 0, "im": 1}]]},
               {"name": "Hy", "matrix": [[s, s], [s, "-sqrt(1/2)"]]}]
        doc = parse_scenario(doc_with(alice_ops=ops))
        np.testing.assert_array_equal(doc.spec.alice_ops[0].op.entries, [[1, 0], [0, 1j]])

    def test_noise_bits_must_match_dims(self):
        with pytest.raises(ValidationError, match="bits_per_player"):
            parse_scenario(doc_with(classical_noise={"kind": "correlated_flip", "epsilon": 0.1, "bits_per_player": 2}))

    def test_family_labels(self):
        with pytest.raises(ValidationError) as err:
            parse_scenario(doc_with(family={"x_label": "00", "y_label": "99"}))
        assert err.value.field == "family.y_label"
