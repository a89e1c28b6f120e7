"""Monte Carlo frame/bit error rate harness.

Frames are simulated with counter-based per-frame seeding derived from
(master seed, sweep index, frame index, link id), so results are
bit-identical for any worker count; stopping decisions are taken on a
fixed chunk schedule for the same reason.

FER is counted per source block: each source's k information bits form
one frame, so a q-user trial contributes q frames.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .channel import (
    NetworkGeometry,
    canonical_model,
    channel_llr,
    derive_snrs,
    transmit,
)
from .decoder import DecodeConfig, decode
from .exit import ExitCurve
from .limits import ENERGY_CODED, ENERGY_INFO
from .relay import (
    Permutation,
    StrategyConfig,
    default_spread,
    effective_rate,
    make_s_random_interleaver,
    relay_process,
)
from .siso import bcjr
from .trellis import (
    TERMINATED,
    build_trellis,
    codeword_length,
    encode,
    parse_generator_spec,
)

SCHEMA_VERSION = 1

_DEFAULT_SPECS = {
    "A": ("5,7", "3/7"),
    "B": ("1,5/7", "5/7"),
}

# Link-id offsets for per-frame substream derivation.
_LINK_MESSAGE = 0
_LINK_SD = 1000
_LINK_SR = 2000
_LINK_RD = 3000


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that identifies a simulation experiment.

    Execution details (worker count, output paths) are deliberately not
    part of the config, so the config echo and hash are identical no
    matter how the experiment is run.
    """

    q: int = 2
    k: int = 96
    strategy: str = "B"
    group_size: int | None = None
    rho: str | None = None
    source_spec: str | None = None
    inner_spec: str | None = None
    termination: str = TERMINATED
    dsr_ratio: float = 0.25
    drd_ratio: float = 0.75
    path_loss_exponent: float = 3.52
    channel_model: str = "rayleigh"
    snrs_db: tuple[float, ...] = (0.0,)
    max_iterations: int = 15
    early_stop: str = "stable-decisions"
    interleaver_spread: int | None = None
    interleaver_seed: int = 1
    interleaver_file: str | None = None
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    master_seed: int = 1
    energy: str = ENERGY_INFO

    def __post_init__(self):
        if self.q < 1 or self.k < 1:
            raise ValueError("q and k must be positive")
        if self.strategy not in _DEFAULT_SPECS:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if len(self.snrs_db) == 0:
            raise ValueError("SNR sweep must be nonempty")
        if any(b >= a for a, b in zip(self.snrs_db[1:], self.snrs_db)):
            raise ValueError("SNR sweep must be strictly increasing")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.energy not in (ENERGY_CODED, ENERGY_INFO):
            raise ValueError(f"unknown energy mode {self.energy!r}")
        canonical_model(self.channel_model)
        object.__setattr__(self, "snrs_db", tuple(float(s) for s in self.snrs_db))
        if self.rho is not None:
            object.__setattr__(self, "rho", str(Fraction(self.rho)))

    def geometry(self) -> NetworkGeometry:
        return NetworkGeometry(
            dsr_ratio=self.dsr_ratio,
            drd_ratio=self.drd_ratio,
            path_loss_exponent=self.path_loss_exponent,
        )

    def strategy_config(self) -> StrategyConfig:
        src_text, inner_text = _DEFAULT_SPECS[self.strategy]
        src = parse_generator_spec(self.source_spec or src_text)
        inner = parse_generator_spec(self.inner_spec or inner_text)
        if self.strategy == "A":
            return StrategyConfig(
                variant="A",
                inner_spec=inner,
                source_specs=(src,) * self.q,
                j=self.group_size if self.group_size is not None else self.q,
                source_termination=self.termination,
            )
        rho = Fraction(self.rho) if self.rho is not None else Fraction(1, self.q)
        return StrategyConfig(
            variant="B",
            inner_spec=inner,
            source_specs=(src,) * self.q,
            rho=rho,
            source_termination=self.termination,
        )

    def concat_length(self) -> int:
        strat = self.strategy_config()
        return sum(
            codeword_length(build_trellis(s), self.k, self.termination)
            for s in strat.source_specs
        )

    def interleaver(self) -> Permutation:
        if self.interleaver_file:
            return Permutation.load(self.interleaver_file)
        n = self.concat_length()
        spread = (self.interleaver_spread
                  if self.interleaver_spread is not None else default_spread(n))
        return make_s_random_interleaver(n, spread, self.interleaver_seed)

    def rate_scale(self) -> float:
        """Symbol-energy scale applied to every link: 1 for per-coded-bit
        energy, the nominal system rate for per-information-bit energy."""
        if self.energy == ENERGY_CODED:
            return 1.0
        return float(effective_rate(self.q, self.k, self.strategy_config()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snrs_db"] = list(self.snrs_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "snrs_db" in d:
            d["snrs_db"] = tuple(d["snrs_db"])
        return cls(**d)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class FerRecord:
    gamma_sd_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    mean_iterations: float
    stop_reason: str
    config_hash: str
    seed: int
    wall_time_s: float = 0.0

    FIELDS = (
        "gamma_sd_db", "frames", "frame_errors", "bit_errors", "fer", "ber",
        "mean_iterations", "stop_reason", "config_hash", "seed",
    )


def _frame_rng(master_seed: int, sweep_idx: int, frame_idx: int,
               link_id: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, sweep_idx, frame_idx, link_id])
    )


def _simulate_coop_frames(
    cfg: ExperimentConfig,
    strategy: StrategyConfig,
    perm: Permutation,
    sweep_idx: int,
    frame_lo: int,
    frame_hi: int,
) -> tuple[int, int, int, int, int]:
    """Simulate trials [frame_lo, frame_hi); returns (blocks, block_errors,
    bit_errors, iteration_sum, trials)."""
    gamma = cfg.snrs_db[sweep_idx]
    snrs = derive_snrs(gamma, cfg.geometry())
    model = canonical_model(cfg.channel_model)
    scale = cfg.rate_scale()
    trellises = strategy.source_trellises()
    dec_cfg = DecodeConfig(
        strategy=strategy,
        perm=perm,
        max_iterations=cfg.max_iterations,
        early_stop=cfg.early_stop,
    )
    blocks = block_errors = bit_errors = iter_sum = trials = 0
    for f in range(frame_lo, frame_hi):
        msgs = []
        chan_sd = []
        chan_sr = []
        for i, tr in enumerate(trellises):
            rng_msg = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_MESSAGE + i)
            u = rng_msg.integers(0, 2, cfg.k).astype(np.int8)
            cw = encode(tr, u, cfg.termination)
            rng_sd = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_SD + i)
            rng_sr = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_SR + i)
            chan_sd.append(channel_llr(
                transmit(cw, snrs.gamma_sd_db, model, rng_sd, rate=scale)
            ))
            chan_sr.append(channel_llr(
                transmit(cw, snrs.gamma_sr_db, model, rng_sr, rate=scale)
            ))
            msgs.append(u)
        relay_word = relay_process(chan_sr, strategy, perm)
        rng_rd = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_RD)
        chan_rd = channel_llr(
            transmit(relay_word, snrs.gamma_rd_db, model, rng_rd, rate=scale)
        )
        outcome = decode(chan_sd, chan_rd, dec_cfg)
        for u, dec in zip(msgs, outcome.decisions):
            errs = int(np.count_nonzero(u != dec))
            blocks += 1
            bit_errors += errs
            if errs:
                block_errors += 1
        iter_sum += outcome.iterations_used
        trials += 1
    return blocks, block_errors, bit_errors, iter_sum, trials


def _simulate_baseline_frames(
    cfg: ExperimentConfig,
    spec_text: str,
    sweep_idx: int,
    frame_lo: int,
    frame_hi: int,
) -> tuple[int, int, int, int, int]:
    gamma = cfg.snrs_db[sweep_idx]
    model = canonical_model(cfg.channel_model)
    spec = parse_generator_spec(spec_text)
    tr = build_trellis(spec)
    scale = (1.0 if cfg.energy == ENERGY_CODED
             else 1.0 / spec.outputs_per_step)
    tail = spec.memory if cfg.termination == TERMINATED else 0
    blocks = block_errors = bit_errors = trials = 0
    for f in range(frame_lo, frame_hi):
        for i in range(cfg.q):
            rng_msg = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_MESSAGE + i)
            u = rng_msg.integers(0, 2, cfg.k).astype(np.int8)
            cw = encode(tr, u, cfg.termination)
            rng_sd = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_SD + i)
            llr = channel_llr(
                transmit(cw, gamma, model, rng_sd, rate=scale)
            )
            steps = cfg.k + tail
            res = bcjr(tr, llr, np.zeros(steps), cfg.termination)
            dec = (res.app_info[:cfg.k] < 0).astype(np.int8)
            errs = int(np.count_nonzero(u != dec))
            blocks += 1
            bit_errors += errs
            if errs:
                block_errors += 1
        trials += 1
    return blocks, block_errors, bit_errors, trials, trials


def _coop_worker(args):
    cfg_dict, sweep_idx, lo, hi, perm_forward, perm_spread, perm_seed = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    perm = Permutation(
        forward=np.asarray(perm_forward, dtype=np.int64),
        spread=perm_spread,
        seed=perm_seed,
    )
    return _simulate_coop_frames(
        cfg, cfg.strategy_config(), perm, sweep_idx, lo, hi
    )


def _baseline_worker(args):
    cfg_dict, spec_text, sweep_idx, lo, hi = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return _simulate_baseline_frames(cfg, spec_text, sweep_idx, lo, hi)


def _chunk_schedule(start: int = 64, cap: int = 4096):
    size = start
    while True:
        yield size
        size = min(cap, size * 2)


def _run_sweep_point(cfg, sweep_idx, worker_fn, worker_args, workers):
    """Drive one sweep point under the stopping rule.  The chunk schedule
    is fixed, so the set of simulated frames (and therefore the counts)
    does not depend on the worker count."""
    t0 = time.perf_counter()
    blocks = block_errors = bit_errors = iter_sum = trials = 0
    next_frame = 0
    pool = None
    ctx = get_context("fork")
    if workers > 1:
        pool = ctx.Pool(workers)
    try:
        for chunk in _chunk_schedule():
            remaining = cfg.max_frames - blocks
            if remaining <= 0:
                break
            trials_needed = max(1, min(chunk, -(-remaining // cfg.q)))
            lo, hi = next_frame, next_frame + trials_needed
            next_frame = hi
            if pool is None:
                parts = [worker_fn(worker_args(sweep_idx, lo, hi))]
            else:
                bounds = np.linspace(lo, hi, workers + 1).astype(int)
                jobs = [
                    worker_args(sweep_idx, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if b > a
                ]
                parts = pool.map(worker_fn, jobs)
            for part in parts:
                blocks += part[0]
                block_errors += part[1]
                bit_errors += part[2]
                iter_sum += part[3]
                trials += part[4]
            if block_errors >= cfg.min_frame_errors or blocks >= cfg.max_frames:
                break
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    stop_reason = ("frame_errors" if block_errors >= cfg.min_frame_errors
                   else "max_frames")
    return FerRecord(
        gamma_sd_db=cfg.snrs_db[sweep_idx],
        frames=blocks,
        frame_errors=block_errors,
        bit_errors=bit_errors,
        fer=block_errors / blocks if blocks else 0.0,
        ber=bit_errors / (blocks * cfg.k) if blocks else 0.0,
        mean_iterations=iter_sum / trials if trials else 0.0,
        stop_reason=stop_reason,
        config_hash=cfg.config_hash(),
        seed=cfg.master_seed,
        wall_time_s=time.perf_counter() - t0,
    )


def run_fer(cfg: ExperimentConfig, workers: int = 1) -> list[FerRecord]:
    """Cooperative-scheme FER sweep: sources broadcast to relay and
    destination, the relay decodes and forwards (errors allowed), the
    destination decodes iteratively."""
    perm = cfg.interleaver()
    cfg_dict = cfg.to_dict()

    def args(sweep_idx, lo, hi):
        return (cfg_dict, sweep_idx, lo, hi,
                perm.forward, perm.spread, perm.seed)

    return [
        _run_sweep_point(cfg, i, _coop_worker, args, workers)
        for i in range(len(cfg.snrs_db))
    ]


def run_trace(
    cfg: ExperimentConfig,
    sweep_idx: int = 0,
    n_trials: int = 10,
    path=None,
) -> list[tuple[int, int, int, int]]:
    """Re-simulate the first trials of one sweep point with truth supplied
    and collect (frame id, iteration, source id, residual bit errors) rows;
    optionally written as CSV.  Uses the same per-frame seeding as run_fer,
    so the traced frames are exactly the simulated ones."""
    strategy = cfg.strategy_config()
    perm = cfg.interleaver()
    gamma = cfg.snrs_db[sweep_idx]
    snrs = derive_snrs(gamma, cfg.geometry())
    model = canonical_model(cfg.channel_model)
    scale = cfg.rate_scale()
    trellises = strategy.source_trellises()
    dec_cfg = DecodeConfig(
        strategy=strategy,
        perm=perm,
        max_iterations=cfg.max_iterations,
        early_stop=cfg.early_stop,
    )
    rows: list[tuple[int, int, int, int]] = []
    for f in range(n_trials):
        msgs, chan_sd, chan_sr = [], [], []
        for i, tr in enumerate(trellises):
            rng_msg = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_MESSAGE + i)
            u = rng_msg.integers(0, 2, cfg.k).astype(np.int8)
            cw = encode(tr, u, cfg.termination)
            rng_sd = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_SD + i)
            rng_sr = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_SR + i)
            chan_sd.append(channel_llr(
                transmit(cw, snrs.gamma_sd_db, model, rng_sd, rate=scale)))
            chan_sr.append(channel_llr(
                transmit(cw, snrs.gamma_sr_db, model, rng_sr, rate=scale)))
            msgs.append(u)
        relay_word = relay_process(chan_sr, strategy, perm)
        rng_rd = _frame_rng(cfg.master_seed, sweep_idx, f, _LINK_RD)
        chan_rd = channel_llr(
            transmit(relay_word, snrs.gamma_rd_db, model, rng_rd, rate=scale))
        outcome = decode(chan_sd, chan_rd, dec_cfg, truth=msgs)
        for iteration, source, errs in outcome.per_iteration_trace:
            rows.append((f, iteration, source, errs))
    if path is not None:
        lines = ["frame,iteration,source,bit_errors"]
        lines += [f"{a},{b},{c},{d}" for a, b, c, d in rows]
        Path(path).write_text("\n".join(lines) + "\n")
    return rows


BASELINE_SPECS = {"1/2": "1,5/7", "1/3": "5,7,7"}


def run_noncoop_baseline(
    cfg: ExperimentConfig, rate: str = "1/3", workers: int = 1
) -> list[FerRecord]:
    """Non-cooperation baseline: every source transmits alone over the
    direct link with a memory-2 code of the requested rate and is decoded
    by a standalone soft-decision pass."""
    if rate not in BASELINE_SPECS:
        raise ValueError(f"baseline rate must be one of {set(BASELINE_SPECS)}")
    spec_text = BASELINE_SPECS[rate]
    cfg_dict = cfg.to_dict()

    def args(sweep_idx, lo, hi):
        return (cfg_dict, spec_text, sweep_idx, lo, hi)

    return [
        _run_sweep_point(cfg, i, _baseline_worker, args, workers)
        for i in range(len(cfg.snrs_db))
    ]


# ---------------------------------------------------------------------------
# Result persistence

_EXIT_FIELDS = ("i_a", "i_e", "component", "gamma_sd_db", "gamma_rd_db")


def _fer_rows(records: list[FerRecord], include_timing: bool):
    fields = list(FerRecord.FIELDS) + (["wall_time_s"] if include_timing else [])
    for rec in records:
        yield {f: getattr(rec, f) for f in fields}


def _exit_rows(curves: list[ExitCurve]):
    for curve in curves:
        for i_a, i_e in zip(curve.i_a, curve.i_e):
            yield {
                "i_a": float(i_a),
                "i_e": float(i_e),
                "component": curve.component,
                "gamma_sd_db": curve.gamma_sd_db,
                "gamma_rd_db": curve.gamma_rd_db,
            }


def emit_results(
    records,
    fmt: str,
    path,
    config: ExperimentConfig | dict | None = None,
    kind: str | None = None,
    include_timing: bool = False,
) -> Path:
    """Persist FER records or EXIT curves as CSV or JSON.

    The full experiment config is echoed into every file; wall-clock
    timings are excluded unless requested so reruns of the same config
    produce byte-identical files.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    if kind is None:
        kind = "exit" if isinstance(records[0], ExitCurve) else "fer"
    if kind == "fer":
        rows = list(_fer_rows(records, include_timing))
    elif kind == "exit":
        rows = list(_exit_rows(records))
    else:
        raise ValueError(f"unknown record kind {kind!r}")
    if kind == "fer" and not rows:
        raise ValueError("no rows to write")
    config_dict = None
    if config is not None:
        config_dict = (config.to_dict()
                       if isinstance(config, ExperimentConfig) else dict(config))
    path = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# schema: relaycode-{kind}/{SCHEMA_VERSION}\n")
        if config_dict is not None:
            canon = json.dumps(config_dict, sort_keys=True)
            buf.write(f"# config: {canon}\n")
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
        path.write_text(buf.getvalue())
    elif fmt == "json":
        doc = {
            "schema": f"relaycode-{kind}/{SCHEMA_VERSION}",
            "config": config_dict,
            "records": rows,
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; use csv or json")
    return path


def parse_results(path) -> tuple[list[dict], dict | None]:
    """Read a result file back; returns (rows, config echo or None)."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["records"], doc.get("config")
    config = None
    lines = text.splitlines()
    data_lines = []
    for line in lines:
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            data_lines.append(line)
    reader = csv.DictReader(io.StringIO("\n".join(data_lines)))
    rows = []
    for raw in reader:
        row = {}
        for key, value in raw.items():
            if value is None or value == "":
                row[key] = None
                continue
            try:
                row[key] = int(value)
            except ValueError:
                try:
                    row[key] = float(value)
                except ValueError:
                    row[key] = value
        rows.append(row)
    return rows, config
