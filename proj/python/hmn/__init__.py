"""Inference for hybrid mixed networks (discrete + linear-Gaussian + hard
constraints): exact join-tree clustering, bounded join-graph propagation,
and constraint-aware Rao-Blackwellised importance sampling.

The heavy lifting lives in the C++ extension `_hmn`; these wrappers move
dicts in and out.
"""

import json as _json

from _hmn import HmnError  # noqa: F401
from _hmn import (
    error_metrics as _error_metrics,
    exact_marginals as _exact,
    generate_network as _generate,
    ijgp_marginals as _ijgp,
    run_benchmark as _benchmark,
    sample_marginals as _sample,
)

__all__ = [
    "HmnError",
    "generate",
    "exact",
    "ijgp",
    "sample",
    "metrics",
    "benchmark",
]


def generate(n1, n2, k, c1, c2, p, t, seed=0, evidence_fraction=0.0):
    """Random instance of the parametric model; returns the network dict."""
    return _json.loads(_generate(n1, n2, k, c1, c2, p, t, seed,
                                 evidence_fraction))


def exact(network):
    """Exact posterior marginals given the evidence inside the network."""
    return _json.loads(_exact(_as_json(network)))


def ijgp(network, i_bound, iterations=10, tolerance=1e-8):
    """IJGP(i) marginals."""
    return _json.loads(_ijgp(_as_json(network), i_bound, iterations,
                             tolerance))


def sample(network, mode="ijgp-rb", i_bound=2, w=0, samples=1000, seed=0,
           ijgp_iterations=10):
    """Importance-sampling estimates (mode: 'ijgp-rb' or 'pure-rb')."""
    return _json.loads(_sample(_as_json(network), mode, i_bound, w, samples,
                               seed, ijgp_iterations))


def metrics(exact_marginals, approx_marginals):
    """Absolute/relative/KL errors between two marginal dicts."""
    return _json.loads(_error_metrics(_json.dumps(exact_marginals),
                                      _json.dumps(approx_marginals)))


def benchmark(config):
    """Run the full evaluation grid; returns the summary text."""
    return _benchmark(_as_json(config))


def _as_json(value):
    return value if isinstance(value, str) else _json.dumps(value)
