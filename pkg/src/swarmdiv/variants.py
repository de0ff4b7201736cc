"""Registry of runnable algorithm variants and their tunable parameters."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["VariantInfo", "VARIANTS", "allowed_params"]

# parameter names accepted per family / control strategy
_QPSO_FIXED = {"alpha"}
_QPSO_LINEAR = {"alpha_start", "alpha_end"}
_TDC = {"d_lower", "d_upper", "n_phase1", "alpha2", "alpha3", "reevaluate_after_collapse"}
_CDS = {"alpha1", "exponent", "dd_initial", "dd_final", "du_initial", "du_final",
        "reevaluate_after_collapse"}
_PSO_INERTIA = {"c1", "c2", "w_start", "w_end", "v_max"}
_PSO_CONSTRICTION = {"c1", "c2", "chi"}


@dataclass(frozen=True)
class VariantInfo:
    tag: str
    family: str          # "qpso2" | "qpso1" | "pso"
    control: str         # "none" | "tdc" | "cds"
    schedule: str        # "fixed" | "linear" coefficient schedule (qpso only)
    pso_mode: str = ""   # "inertia" | "constriction" (pso only)
    topology: str = "global"
    description: str = ""


def _qpso(tag, family, control, schedule, description):
    return VariantInfo(tag=tag, family=family, control=control, schedule=schedule,
                       description=description)


VARIANTS: dict[str, VariantInfo] = {v.tag: v for v in [
    _qpso("qpso-fc", "qpso2", "none", "fixed",
          "mean-best contraction, fixed coefficient 0.75"),
    _qpso("qpso-vc", "qpso2", "none", "linear",
          "mean-best contraction, coefficient 1.0 -> 0.5"),
    _qpso("qpso-type1-fc", "qpso1", "none", "fixed",
          "focus-point contraction, fixed coefficient 0.75"),
    _qpso("qpso-type1-vc", "qpso1", "none", "linear",
          "focus-point contraction, coefficient 1.0 -> 0.5"),
    _qpso("qpso-tdc-fc", "qpso2", "tdc", "fixed",
          "threshold diversity control over qpso-fc"),
    _qpso("qpso-tdc-vc", "qpso2", "tdc", "linear",
          "threshold diversity control over qpso-vc"),
    _qpso("qpso-cds-fc", "qpso2", "cds", "fixed",
          "scheduled diversity control over qpso-fc"),
    _qpso("qpso-cds-vc", "qpso2", "cds", "linear",
          "scheduled diversity control over qpso-vc"),
    VariantInfo("pso-in", "pso", "none", "linear", pso_mode="inertia",
                description="velocity update, inertia 0.9 -> 0.4, clamped velocity"),
    VariantInfo("pso-in-lbest", "pso", "none", "linear", pso_mode="inertia",
                topology="ring", description="pso-in on a ring neighborhood"),
    VariantInfo("pso-co", "pso", "none", "fixed", pso_mode="constriction",
                description="velocity update, constriction factor 0.7298"),
    VariantInfo("spso", "pso", "none", "fixed", pso_mode="constriction",
                topology="ring", description="pso-co on a ring neighborhood"),
]}


def allowed_params(info: VariantInfo) -> set[str]:
    """Names a config may set for this variant."""
    if info.family == "pso":
        return set(_PSO_INERTIA if info.pso_mode == "inertia" else _PSO_CONSTRICTION)
    names = set(_QPSO_FIXED if info.schedule == "fixed" else _QPSO_LINEAR)
    if info.control == "tdc":
        names |= _TDC
    elif info.control == "cds":
        names |= _CDS
    return names
