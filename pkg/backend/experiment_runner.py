# backend/experiment_runner.py
import csv
import logging
import multiprocessing
from functools import partial
from pathlib import Path

import numpy as np
from tqdm import tqdm

from analysis.bounds import BoundKind, awgn_mfb_ber, simo_bound_sinr
from analysis.sinr import BerEstimate, SinrReport, average_ber, ber_from_sinr, semi_analytic_ber
from backend.models import CSV_COLUMNS, CurveRecord, ExperimentConfig, Mode
from detectors import DetectorKind
from link.scenario import Scenario
from montecarlo.engine import McResult, TrialPlan, compare_semi_vs_mc, run_mc
from utils.errors import LabError, OutputError, SimulationError

LOGGER = logging.getLogger(__name__)


def _semi_realization(realization: int, scenario: Scenario, kind: DetectorKind, grid: tuple,
                      p_max: int) -> list:
    """Per-iteration BerEstimates of one realization at every grid point."""
    H = scenario.channel(realization)
    return [semi_analytic_ber(H, scenario.budget(ebn0_db).alpha, kind, p_max) for ebn0_db in grid]


def _bound_realization(realization: int, scenario: Scenario, grid: tuple) -> list:
    """(LDB, MFB) BerEstimates of the 1 x N_R sub-channel of antenna 0."""
    H = scenario.channel(realization).restrict_to(0)
    out = []
    for ebn0_db in grid:
        alpha = scenario.budget(ebn0_db).alpha
        out.append(tuple(
            ber_from_sinr(SinrReport(np.array([simo_bound_sinr(H, kind, alpha)])))
            for kind in (BoundKind.SIMO_LDB, BoundKind.SIMO_MFB)
        ))
    return out


class ExperimentRunner:
    """Runs every (N_R, detector, Eb/N0, iteration) point of a config in a fixed order."""

    MODES = {
        Mode.SEMI: "semi-analytic averaging",
        Mode.MC: "Monte Carlo error counting",
        Mode.BOUNDS: "SIMO bounds",
    }

    def __init__(self, cfg: ExperimentConfig, progress: bool = True):
        self.cfg = cfg
        self.progress = progress
        self.plan = TrialPlan(
            realizations=cfg.realizations,
            blocks_per_realization=cfg.blocks_per_realization,
            stop_at_errors=cfg.stop_at_errors,
        )

    def scenario(self, N_R: int) -> Scenario:
        cfg = self.cfg
        return Scenario(
            N=cfg.N, L_s=cfg.L_s, N_T=cfg.N_T, N_R=N_R, sigma_s2=cfg.sigma_s2,
            seed=cfg.seed, normalize_pdp=cfg.normalize_pdp,
        )

    def _map(self, job, desc: str) -> list:
        """Ordered map over realization indices, fanned out when workers > 1."""
        indices = range(self.cfg.realizations)
        bar = partial(tqdm, total=self.cfg.realizations, desc=desc, disable=not self.progress, leave=False)
        if self.cfg.workers > 1:
            with multiprocessing.Pool(processes=self.cfg.workers) as pool:
                return list(bar(pool.imap(job, indices)))
        return list(bar(job(r) for r in indices))

    def _iterations(self, kind: DetectorKind) -> int:
        return self.cfg.df_iterations if kind is DetectorKind.IDF else 1

    def semi_curves(self, scenario: Scenario, kind: DetectorKind) -> list:
        """
        Semi-analytic BER averaged over realizations.

        Returns:
            semi[e][p] = BerEstimate at grid point e, iteration p + 1
        """
        grid = tuple(self.cfg.ebn0_db_grid)
        job = partial(_semi_realization, scenario=scenario, kind=kind, grid=grid, p_max=self.cfg.df_iterations)
        per_realization = self._map(job, f"{kind.value} N_R={scenario.N_R}")
        return [
            [average_ber(r[e][p] for r in per_realization) for p in range(self._iterations(kind))]
            for e in range(len(grid))
        ]

    def mc_points(self, scenario: Scenario, kind: DetectorKind) -> list:
        results = []
        for e, ebn0_db in enumerate(self.cfg.ebn0_db_grid):
            results.append(run_mc(self.plan, scenario, kind, ebn0_db, e, self.cfg.df_iterations, self.cfg.workers))
        return results

    def detector_rows(self, scenario: Scenario, kind: DetectorKind) -> list:
        cfg = self.cfg
        semi = self.semi_curves(scenario, kind) if Mode.SEMI in cfg.modes else None
        mc = self.mc_points(scenario, kind) if Mode.MC in cfg.modes else None
        rows = []
        for e, ebn0_db in enumerate(cfg.ebn0_db_grid):
            for p in range(1, self._iterations(kind) + 1):
                rows.append(self._record(scenario, kind, ebn0_db, p,
                                         semi[e][p - 1] if semi else None,
                                         mc[e] if mc else None))
        return rows

    def _record(self, scenario: Scenario, kind: DetectorKind, ebn0_db: float, iteration: int,
                semi: BerEstimate, mc: McResult) -> CurveRecord:
        fields = dict(detector=kind.value, nt=scenario.N_T, nr=scenario.N_R, ebn0_db=ebn0_db,
                      iteration=iteration, seed=self.cfg.seed)
        if semi is not None:
            fields.update(ber_semi=semi.mean_ber, realizations=semi.realizations_averaged)
        if mc is not None:
            fields.update(ber_mc=mc.ber(iteration), mc_errors=mc.errors(iteration), mc_bits=mc.bits_simulated,
                          mc_std_error=mc.std_error(iteration))
            if semi is None:
                fields.update(realizations=mc.realizations_used)
            elif mc.errors(iteration) >= (self.cfg.stop_at_errors or 100):
                check = compare_semi_vs_mc(semi, mc, iteration, self.cfg.mismatch_threshold)
                if not check.agree:
                    LOGGER.warning("%s N_R=%d %.2f dB p=%d: semi %.3e vs MC %.3e (%.1f std errors)",
                                   kind.value, scenario.N_R, ebn0_db, iteration, check.ber_semi,
                                   check.ber_mc, check.gap_std_errors)
        return CurveRecord(**fields)

    def bound_rows(self, scenario: Scenario) -> list:
        cfg = self.cfg
        grid = tuple(cfg.ebn0_db_grid)
        per_realization = self._map(partial(_bound_realization, scenario=scenario, grid=grid),
                                    f"bounds N_R={scenario.N_R}")
        rows = []
        for b, kind in enumerate((BoundKind.SIMO_LDB, BoundKind.SIMO_MFB)):
            for e, ebn0_db in enumerate(grid):
                avg = average_ber(r[e][b] for r in per_realization)
                rows.append(CurveRecord(detector=kind.value, nt=1, nr=scenario.N_R, ebn0_db=ebn0_db,
                                        ber_semi=avg.mean_ber, realizations=avg.realizations_averaged,
                                        seed=cfg.seed))
        eta = cfg.N / (cfg.N + cfg.L_s)
        awgn = np.atleast_1d(awgn_mfb_ber(eta, scenario.N_R, np.asarray(grid)))
        for ebn0_db, ber in zip(grid, awgn):
            rows.append(CurveRecord(detector=BoundKind.SIMO_AWGN_MFB.value, nt=1, nr=scenario.N_R,
                                    ebn0_db=ebn0_db, ber_semi=float(ber), realizations=0, seed=cfg.seed))
        return rows

    def run(self) -> list:
        cfg = self.cfg
        LOGGER.info("Running %s for N_T=%d, N_R=%s", ", ".join(self.MODES[m] for m in cfg.modes),
                    cfg.N_T, cfg.N_R_list)
        records = []
        for N_R in cfg.N_R_list:
            scenario = self.scenario(N_R)
            if Mode.SEMI in cfg.modes or Mode.MC in cfg.modes:
                for kind in cfg.detectors:
                    LOGGER.info("%s detector, N_T=%d, N_R=%d", kind.value, cfg.N_T, N_R)
                    records.extend(self._guarded(self.detector_rows, scenario, kind,
                                                 coordinates={"detector": kind.value, "nt": cfg.N_T, "nr": N_R}))
            if Mode.BOUNDS in cfg.modes:
                LOGGER.info("SIMO bounds, N_R=%d", N_R)
                records.extend(self._guarded(self.bound_rows, scenario,
                                             coordinates={"detector": "bounds", "nr": N_R}))
        return records

    @staticmethod
    def _guarded(step, *args, coordinates: dict):
        try:
            return step(*args)
        except SimulationError as e:
            e.coordinates = {**coordinates, **e.coordinates}
            raise
        except (LabError, np.linalg.LinAlgError) as e:
            raise SimulationError(f"{type(e).__name__}: {e}", coordinates=coordinates) from e


def run_experiment(cfg: ExperimentConfig, progress: bool = False) -> list:
    return ExperimentRunner(cfg, progress).run()


def write_csv(records, path) -> Path:
    """
    Header plus one row per record, columns in CSV_COLUMNS order.

    Floats use 9 significant digits, missing values are empty fields and
    fields are quoted only when they contain a comma or quote.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
            writer.writerow(CSV_COLUMNS)
            for record in records:
                writer.writerow(record.to_row())
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from e
    return path
