"""
Exact-arithmetic workbench for the U- and B-invariant generators of the adjoint action of
GL(n) on n x n matrices: determinantal generators, their weights under the diagonal torus,
the invariant-monomial lattice, and exact verification suites.
"""

_EXPORTS = {
    "BorelInvariantsError": "exceptions",
    "CliConfig": "config",
    "DualRational": "exactnum",
    "GeneratorEvaluator": "invariants",
    "InvariantId": "invariants",
    "LatticeBasis": "characters",
    "Matrix": "exactmat",
    "RankCertificate": "verify",
    "Stage": "invariants",
    "VerificationReport": "reports",
    "WeightVector": "characters",
    "adjugate": "exactmat",
    "certify_rank": "verify",
    "chain_eval": "invariants",
    "det": "exactmat",
    "evaluate": "invariants",
    "independence_rank": "verify",
    "jacobian": "verify",
    "kernel_lattice": "characters",
    "run_suite": "verify",
    "stage_lattice": "characters",
    "weight_J": "characters",
    "weight_stage": "characters",
}


def __getattr__(name: str):
    if module_name := _EXPORTS.get(name):
        from importlib import import_module

        return getattr(import_module(f"borel_invariants.{module_name}"), name)

    raise AttributeError(name)


__all__ = sorted(_EXPORTS)
