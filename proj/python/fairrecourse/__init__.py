"""Recourse-aware fair re-ranking."""

import json

from fairrecourse._core import (
    Dataset,
    Error,
    FairnessConfig,
    InputError,
    InvariantError,
    IoError,
    NoRecourseError,
    Prepared,
    Schema,
    SchemaError,
    StreamError,
    beta_bound,
    counterfactual,
    exchange_admits,
    exchanged_ratio,
    load_dataset,
    parse_dataset,
    prepare,
    ratio_from_means,
)
from fairrecourse import _core

__version__ = "0.1.0"


def synthetic(**spec):
    """Seeded synthetic data; keyword arguments match the generator spec keys."""
    return _core.synthetic(json.dumps(spec))


def audit(prepared, config=None):
    """Fairness audit of the cost ranking as a metrics dict."""
    return json.loads(_core.audit_json(prepared, config or FairnessConfig()))


def _decode(result):
    result = dict(result)
    result["metrics"] = json.loads(result.pop("metrics_json"))
    return result


def rerank(prepared, schema, config=None):
    """Prefix re-ranking. Returns order (ids), interventions and metrics."""
    return _decode(_core.rerank(prepared, schema, config or FairnessConfig()))


def block_rerank(prepared, schema, blocks, config=None):
    """Block re-ranking over `blocks` equal blocks."""
    return _decode(_core.block_rerank(prepared, schema, config or FairnessConfig(), blocks))


__all__ = [
    "Dataset",
    "Error",
    "FairnessConfig",
    "InputError",
    "InvariantError",
    "IoError",
    "NoRecourseError",
    "Prepared",
    "Schema",
    "SchemaError",
    "StreamError",
    "audit",
    "beta_bound",
    "block_rerank",
    "counterfactual",
    "exchange_admits",
    "exchanged_ratio",
    "load_dataset",
    "parse_dataset",
    "prepare",
    "ratio_from_means",
    "rerank",
    "synthetic",
]
