"""
Run the checks a scenario asks for and collect them into a report.

Lie-pair scenarios support ``bott``, ``differentiate``, ``holonomy``,
``agree``, ``normality`` and ``rightinv``; foliation scenarios support
``foliation`` and ``pairdemo``. ``all`` runs every command that applies.
Numerical failures inside a command are recorded in the report and the
remaining commands still run.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from holab.config import Tolerances
from holab.exceptions import ExpressionError, HolabError, NumericalError, ScenarioError
from holab.expression import bind, parse_expression
from holab.holonomy.foliation import (
    FoliationModel,
    GraphFoliation,
    LeafwisePath,
    SpannedFoliation,
    bott_transport_check,
    concatenation_defect,
    holonomy_transport,
    is_trivial,
    linear_holonomy_variational,
    pair_groupoid_demo,
    reversal_defect,
)
from holab.holonomy.group import (
    GroupElement,
    SliceChart,
    chi_conj,
    chi_phi_probe,
    chi_via_bisection,
    composition_defect,
    differentiate_holonomy,
    normality_equivalence,
    slice_independence_residual,
)
from holab.holonomy.groupoid import TransformationGroupoid, right_invariance_check, verify_morphism
from holab.lie.algebra import LieAlgebraBasis, StructureConstants, Subspace
from holab.lie.catalog import named_basis
from holab.lie.pair import LiePair, bott, bott_flatness_residual, differentiate_rep, exp_ad_rep
from holab.scenario.report import Check, Report
from holab.scenario.schema import Scenario

logger = logging.getLogger(__name__)

LIE_COMMANDS = ("bott", "differentiate", "holonomy", "agree", "normality", "rightinv")
FOLIATION_COMMANDS = ("foliation", "pairdemo")
COMMANDS = LIE_COMMANDS + FOLIATION_COMMANDS + ("all",)

# Commands that need a matrix realization of the pair.
_GROUP_COMMANDS = frozenset({"holonomy", "agree", "normality", "rightinv"})

FLATNESS_SAMPLES = 100
MORPHISM_SAMPLES = 20
GROUPOID_SAMPLES = 50
DIFFERENTIATION_STEP = 1e-4
_DEGENERATE_ERROR = 1e-12


# -- building objects from payloads --------------------------------------------


def _vectors(raw, dim: int, pointer: str) -> np.ndarray:
    """An (dim, k) column matrix from a list of k coordinate vectors."""
    for i, v in enumerate(raw):
        if len(v) != dim:
            raise ScenarioError(f"expected {dim} coordinates, got {len(v)}", f"{pointer}/{i}")
    return np.array(raw, dtype=float).reshape(len(raw), dim).T


def build_pair(payload: Dict[str, Any], tolerances: Tolerances, name: str = "") -> LiePair:
    """
    The Lie pair of a ``lie_pair`` payload.

    Raises:
        ScenarioError: On unknown catalog names, bad bases or dimensions, or a
            subalgebra that is not bracket-closed
    """
    algebra = payload["algebra"]
    try:
        if "catalog" in algebra:
            ambient = named_basis(algebra["catalog"])
        elif "basis" in algebra:
            ambient = LieAlgebraBasis(algebra["basis"], name=name, tol_closure=tolerances.closure)
        else:
            ambient = StructureConstants(np.array(algebra["structure_constants"], dtype=float))
    except (ValueError, HolabError) as exc:
        raise ScenarioError(str(exc), "/lie_pair/algebra")

    dim = ambient.dim
    sub = Subspace(_vectors(payload["subalgebra"], dim, "/lie_pair/subalgebra"), dim)
    comp = None
    if "complement" in payload:
        comp = Subspace(_vectors(payload["complement"], dim, "/lie_pair/complement"), dim)
    try:
        pair = LiePair(ambient, sub, comp, name=name, tol_closure=tolerances.closure)
    except ValueError as exc:
        raise ScenarioError(str(exc), "/lie_pair/subalgebra")
    for key in ("h", "g"):
        for i, v in enumerate(payload.get("elements", {}).get(key, [])):
            if len(v) != dim:
                raise ScenarioError(f"expected {dim} coordinates, got {len(v)}", f"/lie_pair/elements/{key}/{i}")
    for i, v in enumerate(payload.get("elements", {}).get("h", [])):
        try:
            pair.require_sub(v)
        except ValueError as exc:
            raise ScenarioError(str(exc), f"/lie_pair/elements/h/{i}")
    return pair


def build_foliation(
    payload: Dict[str, Any],
    tolerances: Tolerances,
    name: str = "",
) -> Tuple[FoliationModel, List[Tuple[LeafwisePath, Dict[str, Any]]]]:
    """
    The model and paths of a ``foliation`` payload.

    Raises:
        ScenarioError: On expression errors, dimension mismatches or a model
            that fails its rank/involutivity/finiteness validation
    """
    box = payload["box"]
    dim = len(box)
    try:
        if payload["model"] == "ode_graph":
            if "rhs" not in payload:
                raise ScenarioError("graph models need 'rhs'", "/foliation")
            exprs = []
            for i, src in enumerate(payload["rhs"]):
                try:
                    exprs.append(parse_expression(src, dim))
                except ExpressionError as exc:
                    raise ScenarioError(str(exc), f"/foliation/rhs/{i}")
            model: FoliationModel = GraphFoliation(box, exprs, name=name, tolerances=tolerances)
        else:
            if "fields" not in payload:
                raise ScenarioError("spanned models need 'fields'", "/foliation")
            fields = []
            for i, components in enumerate(payload["fields"]):
                try:
                    fields.append([parse_expression(src, dim) for src in components])
                except ExpressionError as exc:
                    raise ScenarioError(str(exc), f"/foliation/fields/{i}")
            model = SpannedFoliation(box, fields, name=name, tolerances=tolerances)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc), "/foliation")

    paths = []
    for i, raw in enumerate(payload["paths"]):
        pointer = f"/foliation/paths/{i}"
        if len(raw["start"]) != dim:
            raise ScenarioError(f"expected {dim} coordinates, got {len(raw['start'])}", f"{pointer}/start")
        try:
            if "interval" in raw:
                path = LeafwisePath(start=raw["start"], interval=tuple(raw["interval"]))
            else:
                path = LeafwisePath(start=raw["start"], steps=tuple(tuple(s) for s in raw["word"]))
            path._check_model(model)
        except ValueError as exc:
            raise ScenarioError(str(exc), pointer)
        expected = raw.get("expected", {})
        if "closed_form" in expected:
            try:
                parse_expression(expected["closed_form"], 2)
            except ExpressionError as exc:
                raise ScenarioError(str(exc), f"{pointer}/expected/closed_form")
        paths.append((path, expected))
    for i, (a, b) in enumerate(payload.get("homotopic", [])):
        if max(a, b) >= len(paths):
            raise ScenarioError("path index out of range", f"/foliation/homotopic/{i}")
    return model, paths


def _split(path: LeafwisePath, model: FoliationModel) -> Tuple[LeafwisePath, LeafwisePath]:
    """Cut a path into two halves that concatenate back to it."""
    if path.is_interval:
        x0, x1 = path.interval
        mid = 0.5 * (x0 + x1)
        first = LeafwisePath(start=path.start, interval=(x0, mid))
    elif len(path.steps) > 1:
        first = LeafwisePath(start=path.start, steps=path.steps[: len(path.steps) // 2])
    else:
        i, t = path.steps[0]
        first = LeafwisePath(start=path.start, steps=((i, t / 2),))
    middle = first.endpoint(model)
    if path.is_interval:
        second = LeafwisePath(start=middle, interval=(first.interval[1], path.interval[1]))
    elif len(path.steps) > 1:
        second = LeafwisePath(start=middle, steps=path.steps[len(path.steps) // 2:])
    else:
        i, t = path.steps[0]
        second = LeafwisePath(start=middle, steps=((i, t / 2),))
    return first, second


def _map_record(holonomy) -> Dict[str, Any]:
    return {
        "linear_part": holonomy.linear_part.matrix,
        "samples": [{"in": c_in, "out": c_out} for c_in, c_out in holonomy.samples],
        "failures": [{"in": c, "error": msg} for c, msg in holonomy.failures],
    }


# -- runner --------------------------------------------------------------------


class ScenarioRunner:
    """
    Executes commands against one scenario.

    Args:
        scenario: A validated scenario
        seed: Seed for every random draw; defaults to the scenario's, then 0
        tol_scale: Multiplier for acceptance thresholds
    """

    def __init__(self, scenario: Scenario, seed: Optional[int] = None, tol_scale: float = 1.0):
        self.scenario = scenario
        self.seed = seed if seed is not None else (scenario.seed or 0)
        self.tolerances = scenario.tolerances(tol_scale)
        self._pair: Optional[LiePair] = None
        self._chart: Optional[SliceChart] = None
        self._foliation = None

    def applicable(self) -> Tuple[str, ...]:
        if self.scenario.kind == "lie_pair":
            if self.pair.realization is None:
                return tuple(c for c in LIE_COMMANDS if c not in _GROUP_COMMANDS)
            return LIE_COMMANDS
        if isinstance(self.foliation[0], GraphFoliation):
            return FOLIATION_COMMANDS
        return ("foliation",)

    def run(self, command: str) -> Report:
        """
        Run one command (or ``all``) and return the report.

        Raises:
            ScenarioError: If the command does not apply to this scenario
        """
        if command not in COMMANDS:
            raise ScenarioError(f"unknown command {command!r}; expected one of {list(COMMANDS)}")
        report = Report(
            scenario=self.scenario.name,
            kind=self.scenario.kind,
            command=command,
            seed=self.seed,
            tolerances=self.tolerances.as_dict(),
        )
        applicable = self.applicable()
        if command == "all":
            commands = list(applicable)
            family = LIE_COMMANDS if self.scenario.kind == "lie_pair" else FOLIATION_COMMANDS
            report.skipped.extend(c for c in family if c not in applicable)
        elif command in applicable:
            commands = [command]
        else:
            raise ScenarioError(f"command {command!r} does not apply to scenario {self.scenario.name!r}")

        logger.info("running %s on %s (seed %d)", ", ".join(commands), self.scenario.name, self.seed)
        for name in commands:
            try:
                report.results[name] = getattr(self, f"_run_{name}")(report)
            except (NumericalError, np.linalg.LinAlgError) as exc:
                report.error(name, exc)
        return report

    # -- lazily built objects ------------------------------------------------

    @property
    def pair(self) -> LiePair:
        if self._pair is None:
            self._pair = build_pair(self.scenario.payload, self.tolerances, self.scenario.name)
        return self._pair

    @property
    def chart(self) -> SliceChart:
        if self._chart is None:
            self._chart = SliceChart.build(
                self.pair,
                self.scenario.payload.get("radius", 0.1),
                seed=self.seed,
                newton_tol=self.tolerances.newton,
                max_iter=self.tolerances.newton_max_iter,
            )
        return self._chart

    @property
    def foliation(self):
        if self._foliation is None:
            self._foliation = build_foliation(self.scenario.payload, self.tolerances, self.scenario.name)
        return self._foliation

    def _rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def _basis_vectors(self) -> List[np.ndarray]:
        return list(self.pair.sub.coefficients.T)

    def _elements(self) -> List[np.ndarray]:
        raw = self.scenario.payload.get("elements", {}).get("h")
        if raw:
            return [np.asarray(v, dtype=float) for v in raw]
        return [0.3 * b / self.pair.norm(b) for b in self._basis_vectors()]

    def _bases(self) -> List[np.ndarray]:
        raw = self.scenario.payload.get("elements", {}).get("g", [])
        return [np.asarray(v, dtype=float) for v in raw]

    # -- lie pair commands ---------------------------------------------------

    def _run_bott(self, report: Report) -> Dict[str, Any]:
        pair, tol = self.pair, self.tolerances
        report.add(Check.at_most("jacobi", pair.constants.jacobi_residual(), tol.jacobi))
        report.add(Check.at_most("closure", pair.sub_closure_residual(), tol.closure))

        connection = [{"b": b, "matrix": bott(pair, b).matrix} for b in self._basis_vectors()]
        for i, item in enumerate(self.scenario.payload.get("expected", {}).get("bott", [])):
            computed = bott(pair, item["b"])
            expected = np.array(item["matrix"], dtype=float)
            gap = float(np.max(np.abs(computed.matrix - expected))) if expected.size else 0.0
            report.add(Check.at_most(f"bott_expected[{i}]", gap, tol.linearity, b=item["b"]))

        rng = self._rng(1)
        k = pair.sub_dim
        flatness = 0.0
        for _ in range(FLATNESS_SAMPLES):
            b1 = pair.sub_vector(rng.normal(size=k))
            b2 = pair.sub_vector(rng.normal(size=k))
            flatness = max(flatness, bott_flatness_residual(pair, b1, b2))
        report.add(Check.at_most("bott_flatness", flatness, tol.flatness, samples=FLATNESS_SAMPLES))

        linearity = 0.0
        for _ in range(20):
            b1 = pair.sub_vector(rng.normal(size=k))
            b2 = pair.sub_vector(rng.normal(size=k))
            alpha, beta = rng.normal(size=2)
            lhs = bott(pair, alpha * b1 + beta * b2)
            rhs = bott(pair, b1) * alpha + bott(pair, b2) * beta
            linearity = max(linearity, lhs.distance(rhs))
        report.add(Check.at_most("bott_linearity", linearity, tol.linearity))
        return {"bott": connection, "flatness": flatness, "linearity": linearity}

    def _run_differentiate(self, report: Report) -> Dict[str, Any]:
        pair, tol = self.pair, self.tolerances
        rows = []
        for j, b in enumerate(self._basis_vectors()):
            target = bott(pair, b)
            err = differentiate_rep(pair, b, DIFFERENTIATION_STEP).distance(target)
            err_half = differentiate_rep(pair, b, DIFFERENTIATION_STEP / 2).distance(target)
            refined = differentiate_rep(pair, b, DIFFERENTIATION_STEP, richardson=True).distance(target)
            report.add(Check.at_most(f"differentiation[{j}]", err, tol.differentiation, eps=DIFFERENTIATION_STEP))
            row: Dict[str, Any] = {"b": b, "error": err, "error_half": err_half, "richardson_error": refined}
            if err_half < _DEGENERATE_ERROR:
                logger.warning("ratio test degenerate for basis vector %d: error %.1e", j, err_half)
                report.skipped.append(f"differentiation_ratio[{j}]")
                row["ratio"] = None
            else:
                ratio = err / err_half
                row["ratio"] = ratio
                ok = tol.ratio_low <= ratio <= tol.ratio_high
                report.add(Check(f"differentiation_ratio[{j}]", ratio, tol.ratio_high, ok,
                                 {"window": [tol.ratio_low, tol.ratio_high]}))
            if pair.realization is not None:
                row["holonomy"] = self._holonomy_derivative(report, j, b, target)
            rows.append(row)
        return {"basis": rows}

    def _holonomy_derivative(self, report: Report, j: int, b: np.ndarray, target) -> Dict[str, Any]:
        """Forward differences are O(ε), central ones O(ε²), with constants from |∇_b|."""
        scale = max(1.0, target.norm())
        forward, central = {}, {}
        worst_forward = worst_central = 0.0
        for eps in (1e-2, 1e-3, 1e-4):
            err = differentiate_holonomy(self.chart, b, eps, central=False).distance(target)
            forward[repr(eps)] = err
            worst_forward = max(worst_forward, err / (scale**2 * eps))
        for eps in (1e-2, 1e-3):
            err = differentiate_holonomy(self.chart, b, eps, central=True).distance(target)
            central[repr(eps)] = err
            worst_central = max(worst_central, err / (scale**3 * eps**2))
        report.add(Check.at_most(f"holonomy_forward_order[{j}]", worst_forward, 1.0))
        report.add(Check.at_most(f"holonomy_central_order[{j}]", worst_central, 1.0))
        return {"forward": forward, "central": central}

    def _run_holonomy(self, report: Report) -> Dict[str, Any]:
        pair, tol, chart = self.pair, self.tolerances, self.chart
        maps = []
        for i, b in enumerate(self._elements()):
            holonomy = chi_conj(chart, GroupElement.exp(pair, b))
            expected = exp_ad_rep(pair, b, 1.0)
            gap = holonomy.linear_part.distance(expected)
            report.add(Check.at_most(f"linearization[{i}]", gap, tol.linearization, h=b))
            base = holonomy.lookup(np.zeros(chart.dim))
            report.add(Check.holds(f"base_point_fixed[{i}]", base is not None and not np.any(base)))
            maps.append({"h": b, **_map_record(holonomy)})

        identity = chi_conj(chart, GroupElement.identity(pair.realization.ambient_dim))
        report.add(Check.at_most(
            "identity_holonomy",
            identity.linear_part.distance(identity.linear_part.identity(chart.dim)),
            tol.linearization,
        ))

        for i, item in enumerate(self.scenario.payload.get("expected", {}).get("linear_parts", [])):
            holonomy = chi_conj(chart, GroupElement.exp(pair, item["h"]))
            gap = float(np.max(np.abs(holonomy.linear_part.matrix - np.array(item["matrix"], dtype=float))))
            report.add(Check.at_most(f"linear_part_expected[{i}]", gap, tol.linearization, h=item["h"]))

        rng = self._rng(2)
        worst = 0.0
        for _ in range(MORPHISM_SAMPLES):
            h1 = GroupElement.exp(pair, pair.sub_vector(rng.uniform(-0.3, 0.3, pair.sub_dim)))
            h2 = GroupElement.exp(pair, pair.sub_vector(rng.uniform(-0.3, 0.3, pair.sub_dim)))
            worst = max(worst, composition_defect(chart, h1, h2))
        report.add(Check.at_most("morphism", worst, tol.morphism, samples=MORPHISM_SAMPLES))
        results: Dict[str, Any] = {"radius": chart.radius, "maps": maps, "morphism": worst}

        if "alt_complement" in self.scenario.payload:
            alt = Subspace(_vectors(self.scenario.payload["alt_complement"], pair.dim, "/lie_pair/alt_complement"), pair.dim)
            other_pair = LiePair(pair.realization, pair.sub, alt, name=f"{pair.name}'", tol_closure=pair.tol_closure)
            other = SliceChart.build(other_pair, chart.radius, seed=self.seed,
                                     newton_tol=tol.newton, max_iter=tol.newton_max_iter)
            residual = max(
                slice_independence_residual(chart, other, GroupElement.exp(pair, b)) for b in self._elements()
            )
            report.add(Check.at_most("slice_independence", residual, tol.slice_independence))
            results["slice_independence"] = residual

        if "probe" in self.scenario.payload:
            b1, b2 = (np.asarray(v, dtype=float) for v in self.scenario.payload["probe"])
            probe = chi_phi_probe(chart, GroupElement.exp(pair, b1), GroupElement.exp(pair, b2), tol.triviality)
            results["probe"] = {
                "chi_collision": probe.chi_collision,
                "phi_equal": probe.phi_equal,
                "chi_deviation": probe.chi_deviation,
                "phi_distance": probe.phi_distance,
            }
            report.add(Check.holds("probe_pair_injective", probe.pair_injective))
        return results

    def _run_agree(self, report: Report) -> Dict[str, Any]:
        pair, chart = self.pair, self.chart
        grid = chart.lattice(9)
        rows = []
        for i, b in enumerate(self._elements()):
            h = GroupElement.exp(pair, b)
            conj = chi_conj(chart, h, grid)
            bisection = chi_via_bisection(chart, h, grid)
            deviation = max(conj.deviation_from(bisection), conj.linear_part.distance(bisection.linear_part))
            report.add(Check.at_most(f"agree[{i}]", deviation, self.tolerances.agreement, h=b))
            rows.append({"h": b, "deviation": deviation, "sigma": bisection.metadata["sigma"]})
        return {"grid_points": len(grid), "elements": rows}

    def _run_normality(self, report: Report) -> Dict[str, Any]:
        tol = self.tolerances
        result = normality_equivalence(self.chart, sample_count=8, seed=self.seed, tol=tol.triviality)
        report.add(Check.holds("normality_equivalence", result.consistent,
                               ideal=result.ideal.is_ideal, chi_trivial=result.chi_trivial))
        expected = self.scenario.payload.get("expected", {}).get("ideal")
        if expected is not None:
            report.add(Check.holds("ideal_expected", result.ideal.is_ideal == expected))
        out: Dict[str, Any] = {
            "ideal": result.ideal.is_ideal,
            "ideal_residual": result.ideal.residual,
            "chi_trivial": result.chi_trivial,
            "max_deviation": result.max_deviation,
            "sampled_elements": result.samples,
        }
        if result.bracket_witness is not None:
            out["bracket_witness"] = list(result.bracket_witness)
        if result.witness is not None:
            b, c, deviation = result.witness
            out["witness"] = {"h": b, "c": c, "deviation": deviation}
        if not result.ideal.is_ideal:
            deviation = result.witness[2] if result.witness is not None else 0.0
            report.add(Check.holds("normality_witness", deviation > tol.witness, deviation=deviation))
        return out

    def _run_rightinv(self, report: Report) -> Dict[str, Any]:
        pair, tol, chart = self.pair, self.tolerances, self.chart
        identity = GroupElement.identity(pair.realization.ambient_dim)
        rows = []
        worst = 0.0
        for b in self._elements():
            h = GroupElement.exp(pair, b)
            exact = right_invariance_check(chart, h, identity)
            report.add(Check.holds("right_invariance_at_identity", exact == 0.0, residual=exact))
            for x in self._bases():
                residual = right_invariance_check(chart, h, GroupElement.exp(pair, x))
                worst = max(worst, residual)
                rows.append({"h": b, "g": x, "residual": residual})
        report.add(Check.at_most("right_invariance", worst, tol.right_invariance))

        groupoid = TransformationGroupoid(pair, tol.groupoid)
        rng = self._rng(3)
        laws = all(
            groupoid.verify_groupoid_laws(*groupoid.random_chain(rng), epsilon=tol.groupoid)
            for _ in range(10)
        )
        report.add(Check.holds("groupoid_laws", laws))
        pairs = []
        for _ in range(GROUPOID_SAMPLES):
            later, earlier = groupoid.random_chain(rng, length=2)
            pairs.append((later, earlier))
        defect = verify_morphism(groupoid, pairs)
        report.add(Check.at_most("pi_morphism", defect, tol.groupoid, samples=GROUPOID_SAMPLES))
        return {"triples": rows, "right_invariance": worst, "pi_morphism": defect}

    # -- foliation commands --------------------------------------------------

    def _samples(self) -> Optional[List[np.ndarray]]:
        raw = self.scenario.payload.get("samples")
        return None if raw is None else [np.asarray(s, dtype=float) for s in raw]

    def _run_foliation(self, report: Report) -> Dict[str, Any]:
        model, paths = self.foliation
        tol = self.tolerances
        radius = self.scenario.payload.get("radius", 0.1)
        samples = self._samples()
        rows = []
        maps = []
        for i, (path, expected) in enumerate(paths):
            holonomy = holonomy_transport(model, path, samples=samples, radius=radius)
            variational = linear_holonomy_variational(model, path)
            maps.append(holonomy)
            row: Dict[str, Any] = {"path": i, "variational": variational.matrix, **_map_record(holonomy)}

            if "linear_part" in expected:
                gap = float(np.max(np.abs(holonomy.linear_part.matrix - np.array(expected["linear_part"]))))
                report.add(Check.at_most(f"linear_part[{i}]", gap, tol.closed_form))
            if "variational" in expected:
                gap = float(np.max(np.abs(variational.matrix - np.array(expected["variational"]))))
                report.add(Check.at_most(f"variational[{i}]", gap, tol.variational))
            if "closed_form" in expected:
                report.add(Check.at_most(f"closed_form[{i}]", self._closed_form_gap(holonomy, expected["closed_form"]), tol.closed_form))
            if expected.get("trivial"):
                report.add(Check.holds(f"trivial_holonomy[{i}]", is_trivial(holonomy, tol.triviality)))

            transport = bott_transport_check(model, path, radius=radius)
            report.add(Check.at_most(f"bott_transport[{i}]", transport, tol.bott_transport))
            reversal = reversal_defect(model, path, samples, radius)
            report.add(Check.at_most(f"reversal[{i}]", reversal, tol.reversal))
            first, second = _split(path, model)
            concatenation = concatenation_defect(model, first, second, samples, radius)
            report.add(Check.at_most(f"concatenation[{i}]", concatenation, tol.concatenation))
            row.update({"bott_transport": transport, "reversal": reversal, "concatenation": concatenation})
            rows.append(row)

        for a, b in self.scenario.payload.get("homotopic", []):
            gap = max(maps[a].deviation_from(maps[b]), maps[a].linear_part.distance(maps[b].linear_part))
            report.add(Check.at_most(f"endpoint_dependence[{a},{b}]", gap, tol.linearization))
        return {"model": model.kind, "dim": model.dim, "paths": rows}

    @staticmethod
    def _closed_form_gap(holonomy, source: str) -> float:
        if holonomy.dim != 1:
            raise ScenarioError("closed forms are only supported on one-dimensional slices")
        fn = bind(parse_expression(source, 2), 2)
        worst = 0.0
        for c_in, c_out in holonomy.samples:
            worst = max(worst, abs(float(c_out[0]) - fn(np.array([0.0, c_in[0]]))))
        return worst

    def _run_pairdemo(self, report: Report) -> Dict[str, Any]:
        model, paths = self.foliation
        tol = self.tolerances
        radius = self.scenario.payload.get("radius", 0.1)
        rows = []
        for i, (path, _) in enumerate(paths):
            demo = pair_groupoid_demo(model, path, self._samples(), radius)
            report.add(Check.at_most(f"pair_groupoid[{i}]", demo.deviation, tol.pair_demo))
            report.add(Check.at_most(f"source_fiber_drift[{i}]", demo.source_drift, tol.pair_demo))
            report.add(Check.at_most(f"pair_reversal[{i}]", demo.reversal, tol.reversal))
            rows.append({
                "path": i,
                "deviation": demo.deviation,
                "source_drift": demo.source_drift,
                "reversal": demo.reversal,
            })
        return {"paths": rows}


def run_scenario(
    scenario: Scenario,
    command: str,
    seed: Optional[int] = None,
    tol_scale: float = 1.0,
) -> Report:
    """
    Run ``command`` on ``scenario``.

    Raises:
        ScenarioError: On an unknown or inapplicable command, or inconsistent payload

    Example:
        >>> report = run_scenario(builtin_scenario("sl2_borel"), "bott")
        >>> report.passed
        True
    """
    return ScenarioRunner(scenario, seed, tol_scale).run(command)
