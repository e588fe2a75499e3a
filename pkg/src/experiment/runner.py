"""
Benchmark experiment driver.

This module runs the recovery experiment on a power-flow case: build a
target injection from a chosen state x*, start MPG-N and/or PGD from a
seeded feasible point, write one trace CSV per solver and summarize.
"""

import configparser
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..data.case_reader import CaseReader
from ..data.data_models import CaseData
from ..diagnostics.kl_rate import INCONCLUSIVE, RateFit, fit_kl_rate
from ..output.summary_exporter import SolverSummary, SummaryExporter, SummaryReport
from ..output.trace_writer import read_trace_csv, write_trace_csv
from ..power.grid import (DEFAULT_ANGLE_SPREAD, DEFAULT_U_MAX, DEFAULT_U_MIN, PowerSystem,
                          VoltageState, as_residual_model, make_target)
from ..sets.feasible import BoxSet
from ..solvers.mpgn import MpgnConfig, solve_mpgn
from ..solvers.pgd import PgdConfig, solve_pgd
from ..solvers.results import SolveResult, descent_audit
from ..utils.settings import load_settings


logger = logging.getLogger(__name__)

SOLVER_CHOICES = ('mpgn', 'pgd', 'both')
START_CHOICES = ('random', 'flat')
VOLTAGE_BOUND_CHOICES = ('band', 'case')


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One recovery experiment.

    Attributes:
        case: Case file path or case name
        solver: mpgn, pgd or both
        seed: Seed of the x* and start-point draws
        xstar: flat, random, or a CSV file with columns u and theta
        start: random (seeded feasible draw) or flat
        output_dir: Directory for traces and summaries
        mpgn: MPG-N parameters
        pgd: PGD parameters
        u_min: Lower magnitude bound of the voltage band
        u_max: Upper magnitude bound of the voltage band
        voltage_bounds: band, or case to use the case's VMIN/VMAX
        timed: False writes time_ms as 0 so traces are reproducible byte for byte
        angle_spread: Random x* and start draws keep every angle in
            [−angle_spread, angle_spread] radians
    """
    case: str = 'case14'
    solver: str = 'both'
    seed: int = 1
    xstar: str = 'random'
    start: str = 'random'
    output_dir: str = 'results'
    mpgn: MpgnConfig = field(default_factory=MpgnConfig)
    pgd: PgdConfig = field(default_factory=PgdConfig)
    u_min: float = DEFAULT_U_MIN
    u_max: float = DEFAULT_U_MAX
    voltage_bounds: str = 'band'
    timed: bool = True
    angle_spread: float = DEFAULT_ANGLE_SPREAD

    def __post_init__(self):
        if self.solver not in SOLVER_CHOICES:
            raise ValueError(f"Unknown solver '{self.solver}'. Use one of {list(SOLVER_CHOICES)}")
        if self.start not in START_CHOICES:
            raise ValueError(f"Unknown start mode '{self.start}'. Use one of {list(START_CHOICES)}")
        if self.voltage_bounds not in VOLTAGE_BOUND_CHOICES:
            raise ValueError(f"Unknown voltage bound policy '{self.voltage_bounds}'")
        if self.seed < 0:
            raise ValueError(f"Seed must be nonnegative, got {self.seed}")
        if not 0 < self.angle_spread <= np.pi:
            raise ValueError(f"angle_spread must lie in (0, pi], got {self.angle_spread}")

    @property
    def solvers(self) -> Tuple[str, ...]:
        return ('mpgn', 'pgd') if self.solver == 'both' else (self.solver,)

    @property
    def merit_tol(self) -> float:
        return self.mpgn.merit_tol if 'mpgn' in self.solvers else self.pgd.merit_tol

    @property
    def stem(self) -> str:
        return f"{Path(self.case).stem}_seed{self.seed}"

    @classmethod
    def from_settings(cls, config: configparser.ConfigParser, merit_tol: Optional[float] = None,
                      max_outer: Optional[int] = None, delta: Optional[float] = None,
                      l0: Optional[float] = None, m0: Optional[float] = None,
                      **overrides) -> 'ExperimentConfig':
        """
        Build from settings.ini with command-line overrides.

        merit_tol and max_outer apply to both solvers; delta, l0 and m0 to
        MPG-N only. Other keyword overrides set ExperimentConfig fields.
        None values are ignored.

        Args:
            config: Loaded settings
            merit_tol: Stopping tolerance on ‖F‖
            max_outer: Outer iteration cap
            delta: Descent margin δ
            l0: Regularization floor L₀
            m0: Starting regularization M₀
            **overrides: ExperimentConfig fields

        Returns:
            ExperimentConfig
        """
        mpgn = MpgnConfig.from_settings(config, merit_tol=merit_tol, max_outer=max_outer,
                                        delta=delta, l0=l0, m_init=m0)
        pgd = PgdConfig.from_settings(config, merit_tol=merit_tol, max_outer=max_outer)
        values = dict(
            case=config.get('EXPERIMENT', 'case', fallback=cls.case),
            solver=config.get('EXPERIMENT', 'solver', fallback=cls.solver),
            seed=config.getint('EXPERIMENT', 'seed', fallback=cls.seed),
            xstar=config.get('EXPERIMENT', 'xstar', fallback=cls.xstar),
            start=config.get('EXPERIMENT', 'start', fallback=cls.start),
            timed=config.getboolean('EXPERIMENT', 'timed', fallback=cls.timed),
            angle_spread=config.getfloat('EXPERIMENT', 'angle_spread', fallback=cls.angle_spread),
            output_dir=config.get('OUTPUT', 'directory', fallback=cls.output_dir),
            u_min=config.getfloat('POWERFLOW', 'u_min', fallback=cls.u_min),
            u_max=config.getfloat('POWERFLOW', 'u_max', fallback=cls.u_max),
            voltage_bounds=config.get('POWERFLOW', 'voltage_bounds', fallback=cls.voltage_bounds),
            mpgn=mpgn,
            pgd=pgd,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def parse_seeds(text: str) -> List[int]:
    """
    Parse a seed list such as "1-10" or "1,3,7".

    Args:
        text: Comma-separated seeds or inclusive ranges

    Returns:
        Seeds in the given order without duplicates

    Raises:
        ValueError: If an entry is not an integer or a valid range
    """
    seeds: List[int] = []
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        if '-' in part:
            first, last = (int(v) for v in part.split('-', 1))
            if last < first:
                raise ValueError(f"Empty seed range '{part}'")
            chunk = range(first, last + 1)
        else:
            chunk = [int(part)]
        seeds.extend(s for s in chunk if s not in seeds)
    if not seeds:
        raise ValueError(f"No seeds in '{text}'")
    return seeds


def sample_feasible(seed: Union[int, np.random.SeedSequence], box: BoxSet,
                    bounded_fallback: Tuple[float, float] = (-1.0, 1.0)) -> np.ndarray:
    """
    Uniform per-coordinate sample from a box, deterministic per seed.

    Args:
        seed: Integer seed or SeedSequence
        box: Nonempty box
        bounded_fallback: Interval used for unbounded coordinates

    Returns:
        Feasible point
    """
    return box.sample(np.random.default_rng(seed), bounded_fallback)


def load_state_csv(path: Union[str, Path], n_bus: int) -> VoltageState:
    """
    Read a voltage state from a CSV with columns u and theta (radians).

    Args:
        path: CSV file, one row per bus in case order
        n_bus: Expected number of buses

    Returns:
        VoltageState

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If columns are missing or the row count is wrong
    """
    input_file = Path(path)
    if not input_file.exists():
        raise FileNotFoundError(f"State file not found: {input_file}")

    df = pd.read_csv(input_file)
    missing = [col for col in ('u', 'theta') if col not in df.columns]
    if missing:
        raise ValueError(f"Missing required columns: {missing}")
    if len(df) != n_bus:
        raise ValueError(f"State file has {len(df)} rows, case has {n_bus} buses")

    return VoltageState(df['u'].to_numpy(dtype=float), df['theta'].to_numpy(dtype=float))


def _fit_rate(result: SolveResult) -> RateFit:
    try:
        return fit_kl_rate(result.trace.merit_values, f_star=0.0)
    except ValueError as e:
        logger.debug(f"Rate fit skipped: {e}")
        return RateFit(INCONCLUSIVE, 0.0, 0.0, (0, -1))


def _frozen_clock() -> float:
    return 0.0


class ExperimentRunner:
    """
    Runs recovery experiments and writes their traces and summaries.

    Cases are loaded once per runner and shared between runs.
    """

    def __init__(self, config_path: str = "settings.ini"):
        """
        Initialize the runner with configuration.

        Args:
            config_path: Path to the configuration file
        """
        self.logger = logging.getLogger(__name__)
        self.config_path = config_path
        self.config = load_settings(config_path)
        self.case_reader = CaseReader(config_path)
        self.exporter = SummaryExporter(config_path)
        self._cases: Dict[str, CaseData] = {}

    def load_case(self, case: str) -> CaseData:
        if case not in self._cases:
            self._cases[case] = self.case_reader.load(case)
        return self._cases[case]

    def build_system(self, cfg: ExperimentConfig) -> PowerSystem:
        case = self.load_case(cfg.case)
        return PowerSystem.from_case(case, cfg.u_min, cfg.u_max,
                                     use_case_bounds=cfg.voltage_bounds == 'case')

    def choose_target_state(self, cfg: ExperimentConfig, system: PowerSystem,
                            seed: np.random.SeedSequence) -> VoltageState:
        if cfg.xstar == 'flat':
            return VoltageState.flat(system.N)
        if cfg.xstar == 'random':
            return VoltageState.from_vector(sample_feasible(seed, system.sampling_set(cfg.angle_spread)))
        return load_state_csv(cfg.xstar, system.N)

    def run(self, cfg: ExperimentConfig) -> SummaryReport:
        """
        Run one experiment.

        The x* draw and the start draw use two independent streams spawned
        from the experiment seed. Both come from the sampling sub-box of C,
        so they are feasible with angles bounded by cfg.angle_spread.

        Args:
            cfg: Experiment configuration

        Returns:
            SummaryReport for the run
        """
        system = self.build_system(cfg)
        box = system.feasible_set()
        xstar_seed, start_seed = np.random.SeedSequence(cfg.seed).spawn(2)

        x_star = self.choose_target_state(cfg, system, xstar_seed)
        target = make_target(system, x_star)
        model = as_residual_model(system, target)

        if cfg.start == 'flat':
            x0 = VoltageState.flat(system.N).to_vector()
        else:
            x0 = sample_feasible(start_seed, system.sampling_set(cfg.angle_spread))

        self.logger.info(f"Experiment {cfg.stem}: solvers={list(cfg.solvers)}, "
                         f"x*={cfg.xstar}, start={cfg.start}")

        clock: Callable[[], float] = time.perf_counter if cfg.timed else _frozen_clock
        output_dir = Path(cfg.output_dir)
        report = SummaryReport(case=Path(cfg.case).stem, seed=cfg.seed, xstar=cfg.xstar,
                               start=cfg.start, merit_tol=cfg.merit_tol)

        for name in cfg.solvers:
            if name == 'mpgn':
                result = solve_mpgn(model, box, x0, cfg.mpgn, clock=clock)
            else:
                result = solve_pgd(model, box, x0, cfg.pgd, clock=clock)

            trace_path = output_dir / f"{cfg.stem}_{name}.csv"
            write_trace_csv(result.trace, trace_path)

            violations = -1
            if name == 'mpgn':
                violations = len(descent_audit(read_trace_csv(trace_path), cfg.mpgn.delta))
                if violations:
                    self.logger.warning(f"{cfg.stem}: descent audit failed at {violations} iterations")

            report.solvers[name] = self._summarize(name, result, x_star, trace_path, violations)

        self.exporter.export(report, cfg.output_dir, cfg.stem)
        return report

    def _summarize(self, name: str, result: SolveResult, x_star: VoltageState,
                   trace_path: Path, violations: int) -> SolverSummary:
        trace = result.trace
        doublings = trace.column('ls_doublings')
        fit = _fit_rate(result)
        return SolverSummary(
            solver=name,
            status=result.status.value,
            converged=result.converged,
            iterations=result.iterations,
            final_merit=result.final_merit,
            wall_time_ms=float(trace.records[-1].time_ms),
            ls_doublings_total=int(doublings.sum()),
            ls_doublings_max=int(doublings.max(initial=0)),
            initial_projection=trace.initial_projection,
            distance_to_xstar=float(np.linalg.norm(result.x_final - x_star.to_vector())),
            rate_regime=fit.regime,
            rate=fit.rate,
            rate_r2=fit.r2,
            descent_violations=violations,
            trace_path=str(trace_path),
            flags=list(result.flags),
        )

    def run_batch(self, configs: Sequence[ExperimentConfig], workers: int = 1) -> List[SummaryReport]:
        """
        Run independent experiments, optionally in worker threads.

        Each experiment writes its own files; the key=value records and the
        aggregate are written once all runs have finished.

        Args:
            configs: Experiment configurations
            workers: Thread count (1 runs sequentially)

        Returns:
            Reports in the order of configs
        """
        if not configs:
            return []
        for cfg in configs:
            self.load_case(cfg.case)

        if workers <= 1:
            reports = [self.run(cfg) for cfg in configs]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                reports = list(pool.map(self.run, configs))

        self.exporter.export_records(reports, configs[0].output_dir)
        return reports


def run_experiment(cfg: ExperimentConfig, config_path: str = "settings.ini") -> SummaryReport:
    """
    Run one experiment with a fresh runner.

    Args:
        cfg: Experiment configuration
        config_path: Settings file for case lookup and output options

    Returns:
        SummaryReport
    """
    return ExperimentRunner(config_path).run(cfg)


def seed_sweep(cfg: ExperimentConfig, seeds: Sequence[int]) -> List[ExperimentConfig]:
    """Copies of cfg, one per seed."""
    return [replace(cfg, seed=seed) for seed in seeds]
