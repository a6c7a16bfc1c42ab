"""Scenario files: YAML documents describing a preparator or a RAIO instance.

Top-level keys
--------------
model        sg | hole | custom | raio-twin
variant      builder variant (sg: measurement, detector-passthrough,
             negative, geometrical; hole: negative, geometrical)
label        free text
alpha_re, alpha_im, beta_re, beta_im
             amplitudes (sg, raio-twin)
psi_in       hole model input packet, ``{re: [...], im: [...]}``
geometry     n_sites, split_index, packet_width, packet_centers
unitaries    U_I, U_II: ``identity``, ``seeded-random:<seed>`` or an
             operator record ``{dims, kind, re, im}``
seed         seed of the passthrough unitary (sg) or of the instance (raio-twin)
d_ii, region_size
             raio-twin sizes
rho_composite, trigger, kind, occurrence
             custom model (``trigger: null`` is the certain event)
times        t_i, t_f labels
tolerances   validation_eps, identity_eps, certainty_eps
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .exceptions import PrepsimError, ScenarioError
from .preparators import (
    GridGeometry,
    HOLE_VARIANTS,
    SG_VARIANTS,
    PreparatorSpec,
    build_hole,
    build_sg,
)
from .raio import RaioInstance, build_twin_instance
from .sampling import random_unitary
from .tensor import DEFAULT_TOLERANCES, Operator, Tolerances, from_record, identity

# libyaml bindings when present; the pure-Python fallback is slow on large matrices
_Loader = getattr(yaml, "CSafeLoader", yaml.SafeLoader)
_Dumper = getattr(yaml, "CSafeDumper", yaml.SafeDumper)

MODELS = ("sg", "hole", "custom", "raio-twin")
BUNDLED_DIR = Path(__file__).parent / "scenarios"
BUNDLED = (
    "sg-measurement",
    "sg-passthrough",
    "sg-negative",
    "sg-geometrical",
    "hole-negative",
    "hole-geometrical",
    "raio-twin",
)


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise ScenarioError(f"unknown bundled scenario {name!r}; available: {', '.join(BUNDLED)}")
    return BUNDLED_DIR / f"{name}.yaml"


def _key_lines(node, prefix="", out=None) -> dict:
    """Map dotted key paths of a composed YAML tree to 1-based line numbers."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = f"{prefix}{key.value}"
            out[path] = key.start_mark.line + 1
            _key_lines(value, path + ".", out)
    return out


@dataclass
class Scenario:
    """A parsed (but not yet built) scenario document."""

    data: dict
    lines: dict = field(default_factory=dict)
    source: str = "<memory>"

    @property
    def model(self) -> str:
        return self.data["model"]

    # ------------------------------------------------------------ helpers

    def error(self, message, key=None):
        return ScenarioError(message, field=key, line=self.lines.get(key) if key else None)

    def get(self, key, default=None):
        node = self.data
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def number(self, key, default=None, kind=float):
        value = self.get(key, default)
        if value is None:
            raise self.error("required field is missing", key)
        try:
            out = kind(value)
        except (TypeError, ValueError):
            raise self.error(f"expected a number, got {value!r}", key) from None
        if kind is float and not math.isfinite(out):
            raise self.error(f"expected a finite number, got {value!r}", key)
        return out

    def tolerances(self, overrides=None) -> Tolerances:
        raw = self.get("tolerances") or {}
        if not isinstance(raw, dict):
            raise self.error("expected a mapping", "tolerances")
        try:
            tol = DEFAULT_TOLERANCES.replace(**raw)
            return tol.replace(**(overrides or {}))
        except ValueError as exc:
            raise self.error(str(exc), "tolerances") from None

    def amplitudes(self) -> tuple[complex, complex]:
        alpha = complex(self.number("alpha_re"), self.number("alpha_im", 0.0))
        beta = complex(self.number("beta_re"), self.number("beta_im", 0.0))
        return alpha, beta

    def geometry(self) -> GridGeometry:
        raw = self.get("geometry")
        if raw is None:
            return GridGeometry()
        if not isinstance(raw, dict):
            raise self.error("expected a mapping", "geometry")
        unknown = set(raw) - {"n_sites", "split_index", "packet_width", "packet_centers"}
        if unknown:
            raise self.error(f"unknown geometry field(s) {sorted(unknown)}", "geometry")
        try:
            return GridGeometry(**raw)
        except (PrepsimError, TypeError, ValueError) as exc:
            raise self.error(f"invalid geometry: {exc}", "geometry") from None

    def operator(self, key, tol: Tolerances, dims=None) -> Operator:
        raw = self.get(key)
        if raw is None:
            raise self.error("required operator is missing", key)
        if isinstance(raw, str):
            if dims is None:
                raise self.error(f"cannot infer the dimension for {raw!r}", key)
            if raw == "identity":
                return identity(dims).with_kind("unitary")
            if raw.startswith("seeded-random:"):
                try:
                    seed = int(raw.split(":", 1)[1])
                except ValueError:
                    raise self.error(f"bad seed in {raw!r}", key) from None
                return random_unitary(dims, seed)
            raise self.error(f"expected 'identity', 'seeded-random:<seed>' or an operator record, got {raw!r}", key)
        if not isinstance(raw, dict):
            raise self.error("expected an operator record {dims, kind, re, im}", key)
        try:
            return from_record(raw, tol.validation_eps)
        except PrepsimError as exc:
            raise self.error(f"invalid operator: {exc}", key) from None

    # ------------------------------------------------------------ building

    def build(self, seed=None, tolerance_overrides=None):
        """Build the :class:`PreparatorSpec` or :class:`RaioInstance`.

        ``seed`` replaces the scenario's own ``seed`` entry.
        """
        tol = self.tolerances(tolerance_overrides)
        try:
            return getattr(self, "_build_" + self.model.replace("-", "_"))(tol, seed)
        except ScenarioError:
            raise
        except PrepsimError as exc:
            raise self.error(f"invariant violated: {exc}", self._blame(exc)) from None

    _BLAME = (
        ("amplitude", "alpha_re"),
        ("psi_in", "psi_in"),
        ("hole", "psi_in"),
        ("packet", "geometry"),
        ("trigger", "trigger"),
        ("rho_composite", "rho_composite"),
        ("U_II", "unitaries.U_II"),
        ("U_I", "unitaries.U_I"),
        ("geometrical", "kind"),
        ("occurrence", "occurrence"),
        ("kind", "kind"),
    )

    def _blame(self, exc) -> str:
        msg = str(exc)
        for needle, key in self._BLAME:
            if needle in msg:
                return key
        return "model"

    def _seed(self, seed):
        return int(self.number("seed", 0, int)) if seed is None else int(seed)

    def _unitaries(self, tol, d_i, d_ii):
        return (self.operator("unitaries.U_I", tol, [d_i]) if self.get("unitaries.U_I") is not None else None,
                self.operator("unitaries.U_II", tol, [d_ii]) if self.get("unitaries.U_II") is not None else None)

    def _variant(self, allowed):
        variant = self.get("variant", "negative")
        if variant not in allowed:
            raise self.error(f"unknown variant {variant!r}; expected one of {list(allowed)}", "variant")
        return variant

    def _times(self, spec: PreparatorSpec) -> PreparatorSpec:
        if self.get("times") is None:
            return spec
        t_i, t_f = self.number("times.t_i", 0.0), self.number("times.t_f", 1.0)
        return PreparatorSpec(spec.rho_composite, spec.trigger, spec.U_I, spec.U_II, spec.kind,
                              spec.occurrence, spec.label, t_i, t_f, spec.tol)

    def _build_sg(self, tol, seed):
        alpha, beta = self.amplitudes()
        norm = abs(alpha) ** 2 + abs(beta) ** 2
        if abs(norm - 1.0) > tol.validation_eps:
            raise self.error(f"normalization: |alpha|^2 + |beta|^2 = {norm!r}, expected 1", "alpha_re")
        geom = self.geometry()
        u_i, u_ii = self._unitaries(tol, 2, geom.n_sites)
        spec = build_sg(alpha, beta, geom, self._variant(SG_VARIANTS), U_I=u_i, U_II=u_ii,
                        seed=self._seed(seed), tol=tol, label=self.get("label"))
        return self._times(spec)

    def _build_hole(self, tol, seed):
        geom = self.geometry()
        psi = None
        raw = self.get("psi_in")
        if raw is not None:
            try:
                psi = np.asarray(raw["re"], float) + 1j * np.asarray(raw.get("im", [0.0] * len(raw["re"])), float)
            except (KeyError, TypeError, ValueError, AttributeError):
                raise self.error("expected {re: [...], im: [...]}", "psi_in") from None
            if abs(np.linalg.norm(psi) - 1.0) > tol.validation_eps:
                raise self.error(f"normalization: psi_in has norm {np.linalg.norm(psi)!r}", "psi_in")
        u_i, u_ii = self._unitaries(tol, geom.n_sites, 2)
        spec = build_hole(psi, geom, self._variant(HOLE_VARIANTS), U_I=u_i, U_II=u_ii,
                          tol=tol, label=self.get("label"))
        return self._times(spec)

    def _build_custom(self, tol, seed):
        rho = self.operator("rho_composite", tol)
        if rho.kind != "density":
            try:
                rho = rho.with_kind("density", tol.validation_eps)
            except PrepsimError as exc:
                raise self.error(f"invalid density operator: {exc}", "rho_composite") from None
        if len(rho.dims) != 2:
            raise self.error(f"rho_composite must be bipartite, got dims {list(rho.dims)}", "rho_composite")
        d_i, d_ii = rho.dims
        trigger = None if self.get("trigger") is None else self.operator("trigger", tol)
        u_i, u_ii = self._unitaries(tol, d_i, d_ii)
        u_i = u_i if u_i is not None else identity([d_i]).with_kind("unitary")
        u_ii = u_ii if u_ii is not None else identity([d_ii]).with_kind("unitary")
        occurrence = self.get("occurrence", "none" if trigger is None else "ideal")
        spec = PreparatorSpec(rho, trigger, u_i, u_ii, self.get("kind", "dynamical"), occurrence,
                              self.get("label", "custom"), tol=tol)
        return self._times(spec)

    def _build_raio_twin(self, tol, seed) -> RaioInstance:
        alpha, beta = self.amplitudes()
        norm = abs(alpha) ** 2 + abs(beta) ** 2
        if abs(norm - 1.0) > tol.validation_eps:
            raise self.error(f"normalization: |alpha|^2 + |beta|^2 = {norm!r}, expected 1", "alpha_re")
        d_ii = self.number("d_ii", 4, int)
        region = self.number("region_size", 2, int)
        try:
            return build_twin_instance(alpha, beta, d_ii, region, self._seed(seed), tol)
        except ValueError as exc:
            raise self.error(str(exc), "region_size" if "region" in str(exc) else "alpha_re") from None

    # ------------------------------------------------------------ echo

    def echo(self) -> dict:
        """The document with operator matrices summarized, for reports."""
        def shrink(node):
            if isinstance(node, dict):
                if {"re", "dims"} <= set(node):
                    return {"dims": node["dims"], "kind": node.get("kind", "general")}
                return {k: shrink(v) for k, v in node.items()}
            if isinstance(node, list) and len(node) > 16:
                return f"<{len(node)} values>"
            return node
        return shrink(self.data)


def loads_scenario(text: str, source="<string>") -> Scenario:
    """Parse scenario text; YAML (and therefore JSON) documents are accepted."""
    try:
        loader = _Loader(text)
        try:
            node = loader.get_single_node()
            data = loader.construct_document(node) if node is not None else None
        finally:
            loader.dispose()
        lines = _key_lines(node) if data is not None else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"{source}: parse error: {getattr(exc, 'problem', exc)}", line=line) from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: a scenario must be a mapping of fields")
    model = data.get("model")
    if model not in MODELS:
        raise ScenarioError(f"unknown model {model!r}; expected one of {list(MODELS)}",
                            field="model", line=lines.get("model"))
    return Scenario(data, lines, source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists() and path.suffix == "" and path.name in BUNDLED:
        path = bundled_path(path.name)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return loads_scenario(text, str(path))


def parse_scenario(path, seed=None, tolerance_overrides=None):
    """Load and fully validate a scenario file.

    Returns a :class:`PreparatorSpec` (sg, hole, custom) or a
    :class:`RaioInstance` (raio-twin).
    """
    return load_scenario(path).build(seed, tolerance_overrides)


def dump_scenario(spec: PreparatorSpec) -> str:
    """Serialize a spec as a self-contained ``custom`` scenario document."""
    return yaml.dump(spec.to_record(), Dumper=_Dumper, sort_keys=False)
