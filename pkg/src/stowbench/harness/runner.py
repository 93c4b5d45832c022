"""Repetition runner with incremental persistence and resume."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..algos.training import RunRecord, train
from ..envs.factory import EpisodeFactory
from ..errors import ConfigError
from .config import ExperimentConfig


def runs_dir(out_dir: str | Path) -> Path:
    return Path(out_dir) / "runs"


def run_path(out_dir: str | Path, rep: int) -> Path:
    return runs_dir(out_dir) / f"run_{rep:03d}.json"


def train_repetition(cfg: ExperimentConfig, rep: int, trace=None) -> RunRecord:
    """Train repetition ``rep`` with seed = base seed + rep."""
    run_seed = cfg.seed + rep
    factory = EpisodeFactory(
        cfg.resolved_scenario(),
        cfg.variant,
        run_seed=run_seed,
        time_model=cfg.time_model,
        lambda_time=cfg.lambda_time,
        trace=trace,
    )
    return train(
        factory, cfg.algo, cfg.algo_config, cfg.total_timesteps,
        cfg.resolved_eval_every, cfg.eval_episodes, run_seed,
    )


def _worker(payload: dict, rep: int) -> dict:
    cfg = ExperimentConfig.from_dict(payload)
    return train_repetition(cfg, rep).to_dict()


def _persist(record: RunRecord, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def _load_existing(cfg: ExperimentConfig, rep: int, path: Path) -> RunRecord:
    record = RunRecord.from_dict(json.loads(path.read_text()))
    expected_seed = cfg.seed + rep
    if (record.algo, record.variant, record.seed) != (cfg.algo, cfg.variant, expected_seed):
        raise ConfigError(
            f"{path} holds a run for ({record.algo}, {record.variant}, seed {record.seed}), "
            f"not ({cfg.algo}, {cfg.variant}, seed {expected_seed}); clean the output directory"
        )
    return record


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Run all repetitions, resuming any already persisted in the output dir."""
    reps = cfg.resolved_repetitions
    records: dict[int, RunRecord] = {}
    pending: list[int] = []
    for rep in range(reps):
        path = run_path(cfg.out_dir, rep)
        if path.exists():
            records[rep] = _load_existing(cfg, rep, path)
        else:
            pending.append(rep)

    workers = cfg.resolved_workers
    if workers > 1 and len(pending) > 1:
        payload = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {rep: pool.submit(_worker, payload, rep) for rep in pending}
            for rep, future in futures.items():
                record = RunRecord.from_dict(future.result())
                _persist(record, run_path(cfg.out_dir, rep))
                records[rep] = record
    else:
        trace_handle = None
        if cfg.trace_path is not None:
            Path(cfg.trace_path).parent.mkdir(parents=True, exist_ok=True)
            trace_handle = open(cfg.trace_path, "w")
        try:
            for rep in pending:
                record = train_repetition(cfg, rep, trace=trace_handle)
                _persist(record, run_path(cfg.out_dir, rep))
                records[rep] = record
        finally:
            if trace_handle is not None:
                trace_handle.close()
    return [records[rep] for rep in range(reps)]


def load_records(out_dir: str | Path) -> list[RunRecord]:
    """All persisted run records under an experiment output directory."""
    root = runs_dir(out_dir)
    if not root.is_dir():
        raise ConfigError(f"{out_dir} holds no runs/ directory")
    records = []
    for path in sorted(root.glob("run_*.json")):
        records.append(RunRecord.from_dict(json.loads(path.read_text())))
    if not records:
        raise ConfigError(f"no run records found under {root}")
    return records
