"""Synthetic run-record builders realizing the reference benchmark's
per-model cell values, used as ground truth for the metric aggregation
tests.

One NSVP value (GPT-5, modification, CA) is carried as 40 rather than the
tabulated 41: that per-model column is internally inconsistent with its own
Average row (35.4) and with every percentage derived from it, so the fixture
uses the value that closes the arithmetic.
"""

from __future__ import annotations

from specloop import Paradigm, RunRecord, SpecificationSet
from specloop.refine import RunOutcome

MODELS = (
    "GPT-3.5-Turbo",
    "Qwen2.5-Coder-32B",
    "Llama-3.1-70B",
    "GPT-4o",
    "GPT-5",
    "Gemini-2.5-Pro",
)

EXCLUDED_FROM_AVERAGE = ("GPT-3.5-Turbo",)

# reference cells: {paradigm: {model: {config: (nvp, nsvp, nvtc, rt)}}}
REFERENCE_TABLE = {
    Paradigm.DELETION: {
        "GPT-3.5-Turbo": {
            "CB": (21, 19, 116.2, 1073.39), "CV": (19, 15, 143.8, 1374.65),
            "CA": (24, 17, 153.4, 1347.90), "CF": (19, 18, 143.8, 1423.57)},
        "Qwen2.5-Coder-32B": {
            "CB": (27, 24, 137.0, 889.51), "CV": (33, 25, 146.0, 1128.77),
            "CA": (30, 20, 150.2, 1176.14), "CF": (35, 27, 139.2, 1020.23)},
        "Llama-3.1-70B": {
            "CB": (30, 29, 128.0, 1149.64), "CV": (28, 23, 136.6, 1645.79),
            "CA": (25, 21, 119.8, 1827.20), "CF": (32, 28, 133.8, 1354.57)},
        "GPT-4o": {
            "CB": (28, 28, 104.4, 845.33), "CV": (33, 29, 149.0, 1205.19),
            "CA": (33, 27, 118.0, 1022.53), "CF": (35, 32, 112.2, 830.02)},
        "GPT-5": {
            "CB": (32, 28, 115.6, 757.77), "CV": (35, 33, 132.8, 863.29),
            "CA": (37, 29, 113.6, 918.49), "CF": (40, 39, 107.8, 632.47)},
        "Gemini-2.5-Pro": {
            "CB": (42, 38, 102.2, 2391.11), "CV": (44, 40, 118.2, 2310.11),
            "CA": (42, 37, 108.6, 2962.98), "CF": (43, 42, 105.8, 2497.99)},
    },
    Paradigm.MODIFICATION: {
        "GPT-3.5-Turbo": {
            "CB": (26, 23, 213.4, 2595.49), "CV": (23, 20, 228.2, 3871.61),
            "CA": (24, 17, 239.2, 2595.55), "CF": (22, 22, 224.4, 2152.99)},
        "Qwen2.5-Coder-32B": {
            "CB": (31, 27, 193.8, 1950.18), "CV": (33, 29, 186.2, 1978.64),
            "CA": (33, 24, 206.4, 2210.20), "CF": (38, 29, 184.8, 1978.03)},
        "Llama-3.1-70B": {
            "CB": (35, 33, 168.4, 3746.44), "CV": (35, 32, 169.0, 4576.49),
            "CA": (34, 32, 193.4, 5529.16), "CF": (35, 32, 177.4, 4752.49)},
        "GPT-4o": {
            "CB": (35, 32, 159.6, 1628.86), "CV": (39, 37, 156.4, 1526.22),
            "CA": (38, 34, 158.0, 2143.61), "CF": (35, 33, 152.6, 1486.39)},
        "GPT-5": {
            "CB": (39, 37, 144.2, 1248.68), "CV": (40, 36, 147.2, 1295.14),
            "CA": (42, 40, 141.2, 1533.03), "CF": (42, 41, 116.2, 1158.36)},
        "Gemini-2.5-Pro": {
            "CB": (47, 47, 102.2, 5588.76), "CV": (48, 46, 109.0, 5540.15),
            "CA": (47, 47, 105.4, 4798.13), "CF": (47, 47, 103.6, 5049.15)},
    },
}

# reference Average rows: {paradigm: {config: (nvp, nsvp, nvtc, rt)}}
REFERENCE_AVERAGES = {
    Paradigm.DELETION: {
        "CB": (31.8, 29.4, 117.44, 1206.67), "CV": (34.6, 30.0, 136.52, 1430.63),
        "CA": (33.4, 26.8, 122.04, 1581.47), "CF": (37.0, 33.6, 119.76, 1267.06)},
    Paradigm.MODIFICATION: {
        "CB": (37.4, 35.2, 153.64, 2832.58), "CV": (39.0, 36.0, 153.56, 2983.33),
        "CA": (38.8, 35.4, 160.88, 3242.83), "CF": (39.4, 36.4, 146.92, 2884.88)},
}

# reference Improvement Ratio row, as fractions: {config: {column: ratio}}
REFERENCE_IMPROVEMENT = {
    "CB": {"nvp": 0.1761, "nsvp": 0.1973, "nvtc": 0.3082, "rt": 1.3474},
    "CV": {"nvp": 0.1272, "nsvp": 0.2000, "nvtc": 0.1248, "rt": 1.0853},
    "CA": {"nvp": 0.1617, "nsvp": 0.3209, "nvtc": 0.3183, "rt": 1.0505},
    "CF": {"nvp": 0.0649, "nsvp": 0.0833, "nvtc": 0.2268, "rt": 1.2768},
}

# reference reduction rates per configuration
REFERENCE_REDUCTION = {
    Paradigm.DELETION: {"CB": 0.0755, "CV": 0.1329, "CA": 0.1976, "CF": 0.0919},
    Paradigm.MODIFICATION: {"CB": 0.0588, "CV": 0.0769, "CA": 0.0876, "CF": 0.0761},
}

N_PROGRAMS = 49
N_RUNS = 5


def program_ids(n: int = N_PROGRAMS) -> list[str]:
    return [f"p{i:02d}" for i in range(n)]


def make_cell_records(config: str, paradigm: Paradigm,
                      nvp: int, nsvp: int, nvtc_mean: float, rt_mean: float,
                      n_programs: int = N_PROGRAMS,
                      n_runs: int = N_RUNS) -> list[RunRecord]:
    """Records over the full grid realizing the given cell values exactly:
    the first nsvp programs verify in runs 1 and 2, the next nvp-nsvp only
    in run 1; tool calls sum to nvtc_mean per run on average; every record
    carries the same elapsed share of rt_mean."""
    assert 0 <= nsvp <= nvp <= n_programs
    ids = program_ids(n_programs)
    total_calls = round(nvtc_mean * n_runs)
    assert total_calls >= n_programs * n_runs, "cannot give every record a call"
    base, rem = divmod(total_calls, n_runs)
    elapsed_each = rt_mean / n_programs

    records = []
    for run_index in range(1, n_runs + 1):
        run_total = base + (1 if run_index <= rem else 0)
        extra = run_total - n_programs
        for pos, program_id in enumerate(ids):
            verified = (pos < nsvp and run_index <= 2) or (
                nsvp <= pos < nvp and run_index == 1)
            records.append(RunRecord(
                program_id=program_id,
                config_name=config,
                paradigm=paradigm,
                run_index=run_index,
                compliant=True,
                outcome=RunOutcome.VERIFIED if verified else RunOutcome.EXHAUSTED,
                tool_calls=1 + (extra if pos == 0 else 0),
                elapsed=elapsed_each,
                iterations=0,
                final_spec=SpecificationSet(),
            ))
    return records


def make_model_records(model: str, paradigm: Paradigm) -> list[RunRecord]:
    """All four configuration cells for one model under one paradigm."""
    records = []
    for config, (nvp, nsvp, nvtc_mean, rt_mean) in REFERENCE_TABLE[paradigm][model].items():
        records.extend(make_cell_records(config, paradigm, nvp, nsvp,
                                         nvtc_mean, rt_mean))
    return records


def make_reference_records() -> dict[str, list[RunRecord]]:
    """Per-model record sets realizing every reference cell."""
    return {
        model: make_model_records(model, Paradigm.DELETION)
        + make_model_records(model, Paradigm.MODIFICATION)
        for model in MODELS
    }


def make_compliance_records(n_compliant: int, config: str = "CV",
                            paradigm: Paradigm = Paradigm.DELETION,
                            n_programs: int = N_PROGRAMS,
                            n_runs: int = N_RUNS) -> list[RunRecord]:
    """Full grid with exactly n_compliant compliant samples."""
    records = []
    sample = 0
    for program_id in program_ids(n_programs):
        for run_index in range(1, n_runs + 1):
            records.append(RunRecord(
                program_id=program_id,
                config_name=config,
                paradigm=paradigm,
                run_index=run_index,
                compliant=sample < n_compliant,
                outcome=RunOutcome.EXHAUSTED,
                tool_calls=1,
                elapsed=1.0,
                iterations=0,
                final_spec=SpecificationSet(),
            ))
            sample += 1
    return records
