import asyncio
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

from artifacts import ArtifactStore
from config import Config, RunConfig
from siegel.approx import contour_h, projection_residual, solve_h_k, thetas_from_set
from siegel.bvp import bump_data, g3, identity_report
from siegel.characters import Character, FamilySpec, build_family, verify_family_member
from siegel.coefficients import inverse_identity_residual, lambda_prime_power_check
from siegel.functional import error_functionals, phi_decomposition, theta_functional
from siegel.interval import IntervalFunction, WeightPair
from siegel.lfunc import twist
from siegel.mollifier import MollifierContext, build_tables, membership_diagnostics, upsilon_functional
from siegel.sieve_means import error_mean_report, sieve_check, zero_anchored_mean
from siegel.zeros import ZeroSet, gap_statistics, scan_zero_set, shifted_zero_set

logger = logging.getLogger(__name__)

ODE_TOLERANCE = 1e-6
BOUNDARY_TOLERANCE = 1e-10
INNER_TOLERANCE = 1e-6


@dataclass
class IdentityRow:
    stage: str
    name: str
    value: float
    target: float
    tolerance: float
    tag: str

    @property
    def passed(self) -> bool:
        return abs(self.value - self.target) <= self.tolerance * max(1.0, abs(self.target))

    def to_dict(self) -> Dict:
        return {"stage": self.stage, "name": self.name, "value": self.value, "target": self.target,
                "tolerance": self.tolerance, "tag": self.tag, "passed": self.passed}


@dataclass
class RunReport:
    config: Dict
    stages: Dict[str, Dict] = field(default_factory=dict)
    identities: List[IdentityRow] = field(default_factory=list)
    skipped: List[Dict] = field(default_factory=list)
    output_dir: str = ""

    @property
    def status(self) -> str:
        failed = [k for k, v in self.stages.items() if v.get("status") == "failed"]
        return "failed" if failed else "success"

    def to_dict(self) -> Dict:
        return {"status": self.status, "stages": self.stages,
                "identities": [r.to_dict() for r in self.identities], "skipped": self.skipped}


class SiegelPipeline:
    """Family → diagnostics → zero scans → per-anchor functionals → family means."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.params = cfg.analysis_params()
        self.policy = cfg.eval_policy()
        self.weight = WeightPair(self.params.delta, self.params.d)
        self.store = ArtifactStore(cfg.output_dir)
        self.semaphore = asyncio.Semaphore(cfg.workers)
        self.one = IntervalFunction.exponential(0.0, self.params.alpha)
        self.chi = None

    async def _bounded(self, func, *args, **kwargs):
        async with self.semaphore:
            return await asyncio.to_thread(func, *args, **kwargs)

    async def run(self) -> RunReport:
        cfg, params = self.cfg, self.params
        warnings = cfg.validate()
        report = RunReport(cfg.to_dict(), output_dir=str(self.store.root))
        report.stages["config"] = {"status": "success", "warnings": warnings}

        try:
            family = build_family(FamilySpec.from_scale(params.D, params.Q))
            members = family.members(cfg.max_characters)
            chi = family.chi
            self.chi = chi
            report.stages["family"] = {"status": "success", **family.summary(), "used": len(members)}
        except Exception as e:
            logger.error(f"Family stage failed: {str(e)}")
            report.stages["family"] = {"status": "failed", "error": str(e)}
            self._write(report, [], {}, [], {})
            return report

        tables = await asyncio.to_thread(build_tables, chi, params, cfg.capF)
        report.stages["coefficients"] = self._coefficient_stage(tables, report)
        report.stages["bvp"], solution = await asyncio.to_thread(self._bvp_stage, report)

        per_psi = await asyncio.gather(
            *[self._psi_stage(psi, chi, tables) for psi in members], return_exceptions=True)
        psi_results: Dict[str, Dict] = {}
        for psi, result in zip(members, per_psi):
            if isinstance(result, Exception):
                logger.error(f"Stage failed for {psi.label()}: {str(result)}")
                result = {"status": "failed", "error": str(result)}
            psi_results[psi.label()] = result
        report.stages["characters"] = {
            "status": "success" if all(r["status"] == "success" for r in psi_results.values()) else "failed",
            "failed": sorted(k for k, r in psi_results.items() if r["status"] != "success"),
        }

        anchors: List[Dict] = []
        jobs = []
        for psi in members:
            result = psi_results[psi.label()]
            if result["status"] != "success":
                report.skipped.append({"psi": psi.label(), "reason": result.get("error", "psi stage failed")})
                continue
            ctx = result.pop("context")
            for record in result["zeros"].records[: cfg.max_anchors]:
                jobs.append(self._anchor_stage(ctx, record, result["zeros"], solution))
        for outcome in await asyncio.gather(*jobs, return_exceptions=True):
            if isinstance(outcome, Exception):
                logger.error(f"Anchor stage failed: {str(outcome)}")
                report.skipped.append({"anchor": None, "reason": str(outcome)})
                continue
            if outcome["status"] != "success":
                report.skipped.append({"psi": outcome["psi"], "gamma": outcome["gamma"],
                                       "reason": outcome["error"]})
                continue
            anchors.append(outcome)
        anchors.sort(key=lambda a: (a["psi"], a["gamma"]))
        for a in anchors:
            report.identities.extend(a.pop("identities"))
        report.stages["anchors"] = {"status": "success", "count": len(anchors), "skipped": len(report.skipped)}

        report.stages["family_means"] = await asyncio.to_thread(
            self._family_stage, members, psi_results, anchors, tables)
        self._write(report, members, psi_results, anchors, report.stages["family_means"])
        return report

    def _coefficient_stage(self, tables, report: RunReport) -> Dict:
        try:
            inverse = inverse_identity_residual(tables.nu, tables.upsilon)
            lam = lambda_prime_power_check(tables.lambda_plus, tables.lambda_minus)
            report.identities.append(IdentityRow("coefficients", "nu_star_upsilon", float(inverse), 0.0, 0.0,
                                                 "nu * upsilon = [n=1]"))
            report.identities.append(IdentityRow("coefficients", "lambda_prime_power",
                                                 lam["identity_residual"], 0.0, 1e-12,
                                                 "lambda-(p^l) closed form"))
            return {"status": "success", "tables": tables.describe(), "lambda": lam}
        except Exception as e:
            logger.error(f"Coefficient stage failed: {str(e)}")
            return {"status": "failed", "error": str(e)}

    def _bvp_stage(self, report: RunReport) -> Tuple[Dict, Optional[object]]:
        try:
            ids = identity_report(self.params, self.cfg.bump_width)
            rows = [
                ("g1.boundary_right", 1.0, BOUNDARY_TOLERANCE), ("g1.boundary_left", 1.0, BOUNDARY_TOLERANCE),
                ("g2.boundary_right", 1.0, BOUNDARY_TOLERANCE), ("g2.boundary_left", 1.0, BOUNDARY_TOLERANCE),
                ("g3.boundary_right", 0.0, 1e-8), ("g3.boundary_left", 0.0, 1e-8),
                ("g1.ode_residual", 0.0, ODE_TOLERANCE), ("g2.ode_residual", 0.0, ODE_TOLERANCE),
                ("g3.ode_residual", 0.0, ODE_TOLERANCE),
                ("g1.inner_with_one", 2.0, INNER_TOLERANCE), ("g2.inner_with_one", 0.0, INNER_TOLERANCE),
                ("g3.inner_with_one", ids["g3.integral_T"], INNER_TOLERANCE),
                ("g1.norm_squared", ids["g1.two_g1_at_one"], INNER_TOLERANCE),
            ]
            for name, target, tol in rows:
                report.identities.append(IdentityRow("bvp", name, float(ids[name]), float(target), tol,
                                                     "weighted Sturm problem"))
            solution = g3(self.params, bump_data(self.params, self.cfg.bump_width))
            return {"status": "success", "identities": ids}, solution
        except Exception as e:
            logger.error(f"BVP stage failed: {str(e)}")
            return {"status": "failed", "error": str(e)}, None

    async def _psi_stage(self, psi: Character, chi: Character, tables) -> Dict:
        cfg = self.cfg
        ctx = MollifierContext(psi, chi, self.params, tables, self.policy)
        try:
            member = verify_family_member(psi, chi)
            membership = await self._bounded(membership_diagnostics, ctx, cfg.grid)
            zeros: ZeroSet = await self._bounded(scan_zero_set, psi, chi, cfg.window, None, self.policy)
            gaps = None
            if len(zeros.records) >= 2:
                gaps = gap_statistics(zeros, self.params.alpha).to_dict()
            return {"status": "success", "member": member, "membership": membership.to_dict(),
                    "zeros": zeros, "gaps": gaps, "context": ctx}
        except Exception as e:
            logger.error(f"Error in psi stage for {psi.label()}: {str(e)}")
            return {"status": "failed", "error": str(e)}

    async def _anchor_stage(self, ctx: MollifierContext, record, zeros: ZeroSet, solution) -> Dict:
        label = ctx.psi.label()
        base = {"psi": label, "gamma": record.gamma, "source": record.source.value}
        try:
            return await self._bounded(self._anchor_work, ctx, record, zeros, solution, base)
        except Exception as e:
            logger.error(f"Error at anchor {label} gamma={record.gamma:.6f}: {str(e)}")
            return {**base, "status": "failed", "error": str(e)}

    def _anchor_work(self, ctx: MollifierContext, record, zeros: ZeroSet, solution, base: Dict) -> Dict:
        params = self.params
        rho = record.rho
        rows: List[IdentityRow] = []
        upsilon = upsilon_functional(ctx, rho)
        decomposition = phi_decomposition(self.one, ctx, rho)
        rows.append(IdentityRow("functional", f"{base['psi']}@{record.gamma:.6f}.phi_decomposition",
                                decomposition["residual"], 0.0, 1e-12, "Phi = boundary + Phi1"))
        theta = theta_functional(self.one, ctx, rho, start_nodes=self.cfg.xi_nodes)
        errors = error_functionals(ctx, rho, upsilon.total)
        out = {
            **base, "status": "success",
            "upsilon": upsilon.total, "A2": upsilon.below_threshold,
            "phi": decomposition["phi"], "phi1": decomposition["phi1"],
            "theta": theta.value, "xi_converged": theta.xi.converged,
            "E1": errors.E1, "E2": errors.E2, "E": errors.E, "E_floor": errors.floor,
            "fundamental_inequality": errors.E >= errors.floor,
        }
        shifted = shifted_zero_set(record, zeros, zeros, params)
        thetas = thetas_from_set(shifted)
        if solution is not None and thetas.size:
            approx = solve_h_k(thetas, params.alpha, self.weight, solution, params.R, self.cfg.tikhonov_scale)
            out.update({f"approx.{k}": v for k, v in approx.report.items()})
            rows.append(IdentityRow("approx", f"{base['psi']}@{record.gamma:.6f}.k_g3_inner",
                                    approx.report["k_g3_inner"], 0.0, 1e-8, "<k, g3> = 0"))
        if thetas.size:
            out.update(self._contour_oracle(ctx, rho, thetas))
        out["T_size"] = int(thetas.size)
        out["identities"] = rows
        return out

    def _contour_oracle(self, ctx: MollifierContext, rho: complex, thetas) -> Dict:
        """Contour R̃₁ and its distance from span{φ_θ}, only with ENABLE_CONTOUR_ORACLE."""
        if not Config.is_feature_enabled("contour_oracle"):
            return {}
        params = self.params
        contour = contour_h(ctx, rho, params.alpha, params.R)
        projection = projection_residual(contour, thetas, params.alpha, self.weight)
        return {"contour.nudges": contour.nudges, "contour.projection_residual": projection["residual"],
                "contour.projection_relative": projection["relative"]}

    def _family_stage(self, members, psi_results, anchors, tables) -> Dict:
        cfg, params = self.cfg, self.params
        try:
            sieve = sieve_check(params.D, params.Q, cfg.sieve_trials, cfg.seed)
            out = {"status": "success", "sieve": sieve.to_dict()}
            if Config.is_feature_enabled("zero_means"):
                entries = [(psi, psi_results[psi.label()].get("zeros")) for psi in members
                           if psi_results[psi.label()]["status"] == "success"]
                limit = int(math.floor(params.Q))
                coeffs = tables.lambda_plus.values[1:limit + 1]
                out["zero_mean"] = zero_anchored_mean(entries, coeffs, params.L, params.Q).to_dict()
            if anchors:
                out["error_mean"] = error_mean_report([a["E"] for a in anchors], params.L, params.Q, params.R)
            return out
        except Exception as e:
            logger.error(f"Family means stage failed: {str(e)}")
            return {"status": "failed", "error": str(e)}

    def _write(self, report: RunReport, members, psi_results, anchors, family) -> None:
        store = self.store
        store.write_json("config.json", report.config)
        store.write_table("characters.csv", pd.DataFrame({
            "label": [p.label() for p in members],
            "modulus": [p.modulus for p in members],
            "conductor": [p.conductor for p in members],
            "parity": [p.parity for p in members],
            "twist_modulus": [twist(p, self.chi).modulus for p in members],
            "status": [psi_results[p.label()]["status"] for p in members],
        }))
        frames = []
        diagnostics = {}
        for p in members:
            result = psi_results[p.label()]
            if result["status"] != "success":
                continue
            zs: ZeroSet = result["zeros"]
            frame = zs.to_frame()
            frame.insert(0, "psi", p.label())
            frames.append(frame)
            diagnostics[p.label()] = {"membership": result["membership"], "member": result["member"],
                                      "argument_count": zs.argument_count, "mismatch": zs.mismatch,
                                      "gaps": result["gaps"]}
            report.identities.append(IdentityRow("zeros", f"{p.label()}.count_mismatch",
                                                 float(zs.mismatch or 0), 0.0, 0.0, "argument principle"))
        store.write_table("zeros.csv", pd.concat(frames, ignore_index=True) if frames else pd.DataFrame())
        store.write_json("diagnostics.json", diagnostics)
        anchor_frame = pd.DataFrame([{k: (abs(v) if isinstance(v, complex) else v) for k, v in a.items()}
                                     for a in anchors])
        store.write_table("anchors.csv", anchor_frame)
        if anchors:
            store.write_table("errors.csv", anchor_frame[["psi", "gamma", "E1", "E2", "E", "E_floor",
                                                           "fundamental_inequality"]])
        store.write_json("family.json", family)
        store.write_json("identities.json", [r.to_dict() for r in report.identities])
        store.write_json("run_report.json", report.to_dict())
        tags = {name: "characters" if name.startswith("char") else name.split(".")[0] for name in store.written}
        store.write_manifest(tags)
