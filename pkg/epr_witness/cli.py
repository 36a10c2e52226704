"""CLI - 위상도 진단, 스윕, HOM 곡선, 호모다인 시뮬레이션, 오라클 검증

n̄, m, |α|² 는 무차원, τ 는 --tau-c 와 같은 단위.
"""

import argparse
import logging
import math
import os
import sys

import numpy as np

from .config import CUTOFF_ENV, OUTPUT_FORMATS, SWEEP_OUTPUTS, SweepConfig, load_settings
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    EprWitnessError,
    TruncationError,
    UnphysicalStateError,
)
from .fock_oracle import epr_state, witness_expectation
from .gaussian_core import (
    ModeMoments,
    RegionLabel,
    TwoModeMoments,
    classify_region,
    covariance_matrix,
    is_squeezed,
    ppt_symplectic_eigenvalues,
)
from .homodyne import (
    LocalOscillator,
    estimate_sz_variance,
    sample_quadrature_records,
    sample_quadrature_records_sharded,
    shot_noise_level,
    stokes_z_variance_exact,
    stokes_z_variance_strong_lo,
    write_records_csv,
)
from .output import RunManifest, write_document, write_table
from .verify import default_grid, run_verification
from .witness import hbt_witness_value, hom_curve, visibility

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3


def status(msg: str):
    print(msg, file=sys.stderr, flush=True)


# ==================== 한 점 진단 ====================

def point_record(nbar: float, m: float) -> dict:
    """classify / sweep 공용 레코드"""
    region = classify_region(nbar, m)
    record = {
        "nbar": float(nbar),
        "m": float(m),
        "region": region.value,
        "witness": None,
        "visibility": None,
        "ppt_nu_minus": None,
        "squeezed": None,
        "warning": None,
    }
    if region == RegionLabel.UNPHYSICAL:
        record["warning"] = "unphysical: |m| > sqrt(nbar(nbar+1))"
        return record

    try:
        record["witness"] = hbt_witness_value(nbar, m).value
        record["visibility"] = visibility(nbar, m)
    except DegenerateInputError:
        record["warning"] = "degenerate: vacuum has no interference signal"
    except UnphysicalStateError:
        # 경계 허용치 안쪽이지만 물리성 허용치 밖
        record["warning"] = "boundary point outside physicality tolerance"
        return record

    cov = covariance_matrix(TwoModeMoments.epr(nbar, m))
    record["ppt_nu_minus"] = ppt_symplectic_eigenvalues(cov).nu_minus
    record["squeezed"] = is_squeezed(ModeMoments(nbar, m))
    return record


def _manifest(args: argparse.Namespace, seeds: list[int] | None = None) -> RunManifest:
    params = {k: v for k, v in vars(args).items() if k not in ("handler", "verbose")}
    return RunManifest(command=args.command, parameters=params, seeds=seeds or [])


def cmd_classify(args: argparse.Namespace) -> int:
    record = point_record(args.nbar, args.m)

    if args.oracle and record["witness"] is not None:
        cutoff = args.cutoff or load_settings().default_cutoff
        status(f"[...] 오라클 계산 (cutoff {cutoff})")
        record["oracle_witness"] = witness_expectation(epr_state(args.nbar, args.m, cutoff, number_diagonal=True))

    status(f"[OK] region={record['region']}")
    if record["witness"] is not None:
        status(f"     witness={record['witness']:.6g}  visibility={record['visibility']:.6g}")
    if record["ppt_nu_minus"] is not None:
        status(f"     nu_minus={record['ppt_nu_minus']:.6g}  squeezed={record['squeezed']}")
    if record["warning"]:
        status(f"[WARN] {record['warning']}")

    write_document(record, args.out, _manifest(args))
    return EXIT_OK


def _grid(lo: float, hi: float, steps: int) -> list[float]:
    return [float(x) for x in np.linspace(lo, hi, steps)]


def cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig.from_json(args.config) if args.config else SweepConfig()
    overrides = config.to_dict()
    if args.nbar_range:
        overrides["nbar_range"] = args.nbar_range
    if args.m_range:
        overrides["m_range"] = args.m_range
    if args.outputs:
        overrides["outputs"] = [o.strip() for o in args.outputs.split(",") if o.strip()]
    if args.format:
        overrides["format"] = args.format
    config = SweepConfig.from_dict(overrides)

    nbars = _grid(*config.nbar_range)
    ms = _grid(*config.m_range)
    status(f"[...] 스윕 {len(nbars)}×{len(ms)}")

    # m 바깥, nbar 안쪽
    rows = [point_record(nbar, m) for m in ms for nbar in nbars]
    columns = ["nbar", "m", *config.outputs]
    write_table(rows, columns, config.format, args.out, _manifest(args))
    status(f"[OK] {len(rows)}행")
    return EXIT_OK


def cmd_hom(args: argparse.Namespace) -> int:
    if not (math.isfinite(args.tau_c) and args.tau_c > 0):
        raise DomainError(f"--tau-c 는 양수여야 함: {args.tau_c}")
    lo, hi, steps = args.tau_range or (-5 * args.tau_c, 5 * args.tau_c, 101)
    if int(steps) < 1 or lo > hi:
        raise DomainError(f"--tau-range 오류: {lo} {hi} {steps}")

    curve = hom_curve(args.nbar, args.m, args.tau_c, _grid(lo, hi, int(steps)))
    rows = [{"tau": t, "p": p} for t, p in curve]
    write_table(rows, ["tau", "p"], args.format or "csv", args.out, _manifest(args))
    status(f"[OK] p(0) = 1 - v = {1 - visibility(args.nbar, args.m):.6g}")
    return EXIT_OK


def cmd_homodyne_sim(args: argparse.Namespace) -> int:
    tm = TwoModeMoments.epr(args.nbar, args.m)
    lo = LocalOscillator.from_alpha2(args.alpha2, args.phi)

    status(f"[...] 샘플 {args.samples}개 (seed {args.seed})")
    if args.shards > 1:
        records = sample_quadrature_records_sharded(tm, args.phi, args.samples, args.seed, args.shards)
    else:
        records = sample_quadrature_records(tm, args.phi, args.samples, args.seed)
    report = estimate_sz_variance(records, lo)

    if args.records_out:
        try:
            with open(args.records_out, "w", encoding="utf-8", newline="") as f:
                write_records_csv(records, f)
        except OSError as e:
            raise DomainError(f"레코드 파일 쓰기 실패 ({args.records_out}): {e}")
        status(f"[OK] 레코드 저장됨: {args.records_out}")

    payload = report.to_dict()
    payload["analytic_exact"] = stokes_z_variance_exact(tm, lo)
    payload["analytic_strong_lo"] = stokes_z_variance_strong_lo(tm, lo)
    payload["shot_noise"] = shot_noise_level(lo)

    write_document(payload, args.out, _manifest(args, seeds=[args.seed]))
    status(f"[OK] {report.estimate:.6g} ± {report.std_error:.2g} -> {report.verdict.value}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    settings = load_settings()
    cutoff = args.cutoff
    if cutoff is None and os.environ.get(CUTOFF_ENV):
        cutoff = settings.default_cutoff
    points = default_grid(args.nbar_max, args.steps)
    status(f"[...] 검증 {len(points)}점 (tol {args.tol:g}, cutoff {cutoff or '수렴 검사'})")

    report = run_verification(points, args.tol, cutoff=cutoff, workers=args.workers, settings=settings)
    rows = []
    for r in report.results:
        row = r.to_dict(args.tol)
        row["failed"] = ";".join(row["failed"])
        rows.append(row)
    columns = ["nbar", "m", "cutoff", "max_deviation", "passed", "failed", "error"]
    write_table(rows, columns, args.format or "csv", args.out, _manifest(args))

    for r in report.failures:
        status(f"[ERR] (nbar={r.nbar:g}, m={r.m:g}) {r.error or ', '.join(r.failed_quantities(args.tol))}")
    if not report.passed:
        return EXIT_FAILED
    status(f"[OK] 최대 편차 {report.max_deviation:.3e}")
    return EXIT_OK


# ==================== 파서 ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprw",
        description="가우시안 EPR 상태 얽힘 증인 도구",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예제:
  eprw classify --nbar 0.5 --m 0.8
  eprw sweep --nbar-range 0 3 100 --m-range 0 3 100 --out fig1.csv
  eprw hom --nbar 0.5 --m 0.8 --tau-c 1
  eprw homodyne-sim --nbar 0.5 --m 0.8 --phi 1.5708 --alpha2 4 --seed 42
  eprw verify --tol 1e-6

환경변수:
  EPRW_DEFAULT_CUTOFF  오라클 기본 cutoff (classify --oracle, --cutoff 없는 verify)
        """,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="디버그 로그")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=True):
        p.add_argument("-o", "--out", help="파일로 저장 (기본 stdout)")
        if formats:
            p.add_argument("-f", "--format", choices=OUTPUT_FORMATS, help="출력 형식")

    def state(p):
        p.add_argument("--nbar", type=float, required=True, help="평균 광자수 n̄")
        p.add_argument("--m", type=float, required=True, help="스퀴징 파라미터 m")

    p = sub.add_parser("classify", help="한 점 진단")
    state(p)
    p.add_argument("--oracle", action="store_true", help="Fock 오라클로 증인 재계산")
    p.add_argument("--cutoff", type=int, help="오라클 cutoff")
    common(p, formats=False)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("sweep", help="(n̄, m) 위상도 스윕")
    p.add_argument("--nbar-range", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--m-range", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--outputs", help=f"쉼표 구분 ({','.join(SWEEP_OUTPUTS)})")
    p.add_argument("--config", help="스윕 설정 JSON")
    common(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("hom", help="HOM 딥 곡선")
    state(p)
    p.add_argument("--tau-c", type=float, required=True, help="상관 시간 τ_c")
    p.add_argument("--tau-range", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    common(p)
    p.set_defaults(handler=cmd_hom)

    p = sub.add_parser("homodyne-sim", help="호모다인 몬테카를로")
    state(p)
    p.add_argument("--phi", type=float, default=math.pi / 2, help="LO 위상 (rad)")
    p.add_argument("--alpha2", type=float, default=4.0, help="LO 세기 |α|²")
    p.add_argument("--samples", type=int, default=10 ** 6, help="샘플 수")
    p.add_argument("--seed", type=int, default=42, help="난수 시드")
    p.add_argument("--shards", type=int, default=1, help="샤드 수")
    p.add_argument("--records-out", help="레코드 CSV (index,x_c,x_d)")
    common(p, formats=False)
    p.set_defaults(handler=cmd_homodyne_sim)

    p = sub.add_parser("verify", help="닫힌 식 vs Fock 오라클")
    p.add_argument("--nbar-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--cutoff", type=int, help="고정 cutoff (기본: $EPRW_DEFAULT_CUTOFF, 없으면 점마다 수렴 검사)")
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(handler=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.handler(args)
    except DomainError as e:
        status(f"[ERR] {e}")
        return EXIT_INVALID
    except (ConvergenceError, TruncationError) as e:
        status(f"[ERR] {e}")
        return EXIT_FAILED
    except EprWitnessError as e:
        status(f"[ERR] {type(e).__name__}: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
