"""Asynchronous processing service: queue, workers, HTTP API, job log, CLI."""

from .backend import BackendCaptioner, BackendClient
from .config import GatewayConfig, InvalidConfig, dump_config, load_config, parse_config
from .joblog import CorruptLog, JobLog, ReplayedJob, format_entry, payload_digest, replay_log
from .runtime import (
    Gateway,
    LoadedModel,
    ModelUnavailable,
    NotFound,
    QueueFull,
    gateway_from_config,
)

__all__ = [
    "BackendCaptioner",
    "BackendClient",
    "CorruptLog",
    "Gateway",
    "GatewayConfig",
    "InvalidConfig",
    "JobLog",
    "LoadedModel",
    "ModelUnavailable",
    "NotFound",
    "QueueFull",
    "ReplayedJob",
    "dump_config",
    "format_entry",
    "gateway_from_config",
    "load_config",
    "parse_config",
    "payload_digest",
    "replay_log",
]
