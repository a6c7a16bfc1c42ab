import textwrap

import numpy as np
import pytest

from prepsim.exceptions import ScenarioError
from prepsim.preparators import DYNAMICAL, GEOMETRICAL, PreparatorSpec, build_sg, run_preparation
from prepsim.raio import RaioInstance
from prepsim.scenario import (
    BUNDLED,
    bundled_path,
    dump_scenario,
    load_scenario,
    loads_scenario,
    parse_scenario,
)
from prepsim.sampling import random_unitary, rng_from_seed
from prepsim.tensor import operator_distance

SG = textwrap.dedent("""\
    model: sg
    variant: negative
    alpha_re: 0.6
    beta_re: 0.8
    geometry:
      n_sites: 8
      split_index: 4
      packet_width: 1.0
      packet_centers: [6.0, 1.0]
""")


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_build(name):
    built = parse_scenario(bundled_path(name))
    assert isinstance(built, (PreparatorSpec, RaioInstance))


def test_bare_name_resolves():
    assert load_scenario("sg-negative").model == "sg"


def test_negative_is_dynamical_ideal():
    spec = parse_scenario(bundled_path("sg-negative"))
    assert (spec.kind, spec.occurrence) == (DYNAMICAL, "ideal")
    assert parse_scenario(bundled_path("hole-geometrical")).kind == GEOMETRICAL


def test_inline_sg():
    spec = loads_scenario(SG).build()
    assert spec.dims == (2, 8)
    assert run_preparation(spec).probability == pytest.approx(0.36, abs=1e-12)


def test_normalization_rejected_with_line():
    text = SG.replace("beta_re: 0.8", "beta_re: 0.7")
    with pytest.raises(ScenarioError) as info:
        loads_scenario(text).build()
    assert info.value.field == "alpha_re"
    assert info.value.line == 3
    assert "normalization" in str(info.value)


def test_unknown_model():
    with pytest.raises(ScenarioError) as info:
        loads_scenario("model: tachyon\n")
    assert info.value.field == "model"
    assert info.value.line == 1


def test_unknown_variant():
    with pytest.raises(ScenarioError) as info:
        loads_scenario(SG.replace("negative", "wishful")).build()
    assert info.value.field == "variant"
    assert info.value.line == 2


def test_yaml_syntax_error_has_line():
    with pytest.raises(ScenarioError) as info:
        loads_scenario("model: sg\nalpha_re: [0.6\nbeta_re: 0.8\n")
    assert info.value.line is not None


def test_not_a_mapping():
    with pytest.raises(ScenarioError):
        loads_scenario("- 1\n- 2\n")


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.yaml")


def test_bad_geometry_field():
    with pytest.raises(ScenarioError) as info:
        loads_scenario(SG.replace("split_index: 4", "split_index: 9")).build()
    assert info.value.field is not None and info.value.field.startswith("geometry")


def test_seeded_unitaries_are_reproducible():
    text = SG + "unitaries:\n  U_I: seeded-random:5\n  U_II: identity\n"
    a, b = loads_scenario(text).build(), loads_scenario(text).build()
    assert np.array_equal(a.U_I.matrix, b.U_I.matrix)


def test_tolerance_override():
    spec = loads_scenario(SG).build(tolerance_overrides={"certainty_eps": 1e-6})
    assert spec.tol.certainty_eps == 1e-6


def test_dump_round_trip(tmp_path):
    rng = rng_from_seed(11)
    spec = build_sg(0.6, 0.8j, U_I=random_unitary([2], rng), U_II=random_unitary([64], rng))
    path = tmp_path / "spec.yaml"
    path.write_text(dump_scenario(spec))
    again = parse_scenario(path)
    for name in ("rho_composite", "trigger", "U_I", "U_II"):
        assert operator_distance(getattr(spec, name), getattr(again, name)).max_entry == 0.0
    assert (again.kind, again.occurrence, again.label) == (spec.kind, spec.occurrence, spec.label)


def test_custom_without_trigger():
    text = textwrap.dedent("""\
        model: custom
        rho_composite:
          dims: [2, 2]
          kind: density
          re: [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]
          im: [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
        trigger: null
    """)
    spec = loads_scenario(text).build()
    assert spec.occurrence == "none"
    assert run_preparation(spec).prepared_state.matrix[0, 0] == pytest.approx(0.5)


def test_raio_twin_seed_override():
    a = load_scenario("raio-twin").build(seed=3)
    b = load_scenario("raio-twin").build(seed=4)
    assert not np.array_equal(a.U.matrix, b.U.matrix)


def test_echo_summarizes_operators():
    spec = build_sg(0.6, 0.8, U_I=random_unitary([2], rng_from_seed(0)))
    echo = loads_scenario(dump_scenario(spec)).echo()
    assert set(echo["rho_composite"]) == {"dims", "kind"}
