"""Deterministic synthetic stand-in for the public blood-panel dataset.

The real file (hosted on an external data platform) cannot be bundled, so
this module generates a surrogate that reproduces its documented shape:
4,412 rows, the published per-column unique-value counts, the class
balance (1,550 in-care), the first 20 rows of the public preview, and the
strong hematology correlations (hematocrit/hemoglobin/erythrocyte block,
MCH/MCV/MCHC block) that motivate the correlation-based feature pruning.

Generation is seeded and fixed: the surrogate is one specific dataset,
not a family. People with the real file can point the CLI at it instead.
"""

from functools import lru_cache

import numpy as np

from .dataio import Dataset, EHR_FEATURE_NAMES

N_ROWS = 4412
N_SEVERE = 1550

# Published unique-value counts per column.
UNIQUE_TARGETS = {
    "HAEMATOCRIT": 326,
    "HAEMOGLOBINS": 128,
    "ERYTHROCYTE": 433,
    "LEUCOCYTE": 276,
    "THROMBOCYTE": 554,
    "MCH": 189,
    "MCHC": 105,
    "MCV": 406,
    "AGE": 95,
    "SEX": 2,
}

# Decimal grid of each column in the source file.
GRID_STEP = {
    "HAEMATOCRIT": 0.1,
    "HAEMOGLOBINS": 0.1,
    "ERYTHROCYTE": 0.01,
    "LEUCOCYTE": 0.1,
    "THROMBOCYTE": 1.0,
    "MCH": 0.1,
    "MCHC": 0.1,
    "MCV": 0.1,
}

# First 20 rows of the public preview, in file column order
# (HCT, HGB, RBC, WBC, PLT, MCH, MCHC, MCV, AGE, SEX, label).
PREVIEW_ROWS = (
    (35.1, 11.8, 4.65, 6.3, 310, 25.4, 33.6, 75.5, 1, "F", 0),
    (43.5, 14.8, 5.39, 12.7, 334, 27.5, 34.0, 80.7, 1, "F", 0),
    (33.5, 11.3, 4.74, 13.2, 305, 23.8, 33.7, 70.7, 1, "F", 0),
    (39.1, 13.7, 4.98, 10.5, 366, 27.5, 35.0, 78.5, 1, "F", 0),
    (30.9, 9.9, 4.23, 22.1, 333, 23.4, 32.0, 73.0, 1, "M", 0),
    (34.3, 11.6, 4.53, 6.6, 185, 25.6, 33.8, 75.7, 1, "M", 0),
    (31.1, 8.7, 5.06, 11.1, 416, 17.2, 28.0, 61.5, 1, "F", 0),
    (40.3, 13.3, 4.73, 8.1, 257, 28.1, 33.0, 85.2, 1, "F", 0),
    (33.6, 11.5, 4.54, 11.4, 262, 25.3, 34.2, 74.0, 1, "F", 0),
    (35.4, 11.4, 4.8, 2.6, 183, 23.8, 32.2, 73.8, 1, "F", 0),
    (33.7, 11.5, 4.57, 13.2, 322, 25.2, 34.1, 73.7, 1, "M", 0),
    (54.0, 16.6, 7.61, 10.0, 88, 21.8, 30.7, 71.0, 1, "F", 1),
    (31.7, 10.4, 4.91, 9.7, 348, 21.2, 32.8, 64.6, 1, "M", 1),
    (35.3, 11.9, 4.4, 5.8, 205, 27.0, 33.7, 80.2, 1, "M", 0),
    (34.5, 9.8, 5.75, 15.4, 548, 17.0, 28.4, 60.0, 1, "M", 0),
    (34.0, 10.3, 5.27, 16.2, 572, 19.5, 30.3, 64.5, 1, "M", 0),
    (35.0, 11.6, 4.58, 7.4, 154, 25.3, 33.1, 76.4, 1, "F", 0),
    (51.3, 15.7, 7.24, 4.8, 129, 21.7, 30.6, 70.9, 1, "F", 0),
    (31.3, 10.8, 4.02, 7.9, 250, 26.9, 34.5, 77.9, 1, "F", 0),
    (36.8, 12.9, 4.67, 5.7, 235, 27.6, 35.1, 78.8, 1, "F", 0),
)

DATASET_SEED = 726901  # fixed: the surrogate is one specific dataset

# Out-care rows split into four subpopulations: routine checks ("bulk"),
# two reactive wings that each shadow ONE half of the in-care profile
# (high leucocyte with normal platelets; normal leucocyte with low
# platelets), and a chronic thrombocytosis arm far from everything else.
# The in-care profile is the conjunction (leucocyte up AND platelets
# down), which axis-by-axis views cannot express.
MILD_SHARES = {"bulk": 0.455, "gray_leu": 0.105, "gray_plt": 0.20, "arm": 0.24}

# Per-group generating parameters. Lognormal (mu, sigma) for the cell
# measurements, normal (mu, sigma) for thrombocyte, plus age/sex shape.
GROUPS = {
    "bulk": {
        "ln_rbc": (np.log(4.72), 0.165),
        "ln_mcv": (np.log(76.5), 0.110),
        "ln_mchc": (np.log(33.2), 0.070),
        "ln_leu": (np.log(6.5), 0.36),
        "throm": (262.0, 74.0),
        "leu_throm_rho": 0.0,
        "child_frac": 0.25,
        "adult_age": (33.0, 17.0),
        "p_male": 0.47,
    },
    "gray_leu": {
        "ln_rbc": (np.log(4.72), 0.165),
        "ln_mcv": (np.log(76.5), 0.110),
        "ln_mchc": (np.log(33.2), 0.070),
        "ln_leu": (np.log(9.7), 0.30),
        "throm": (262.0, 68.0),
        "leu_throm_rho": 0.0,
        "child_frac": 0.12,
        "adult_age": (41.0, 18.0),
        "p_male": 0.49,
    },
    "gray_plt": {
        "ln_rbc": (np.log(4.72), 0.165),
        "ln_mcv": (np.log(76.5), 0.110),
        "ln_mchc": (np.log(33.2), 0.070),
        "ln_leu": (np.log(6.6), 0.34),
        "throm": (196.0, 58.0),
        "leu_throm_rho": 0.0,
        "child_frac": 0.12,
        "adult_age": (40.0, 18.0),
        "p_male": 0.49,
    },
    "arm": {
        "ln_rbc": (np.log(4.72) + 0.010, 0.160),
        "ln_mcv": (np.log(76.5) + 0.010, 0.105),
        "ln_mchc": (np.log(33.2), 0.068),
        "ln_leu": (np.log(12.2), 0.28),
        "throm": (445.0, 65.0),
        "leu_throm_rho": 0.0,
        "child_frac": 0.02,
        "adult_age": (57.0, 14.0),
        "p_male": 0.50,
    },
    "severe": {
        "ln_rbc": (np.log(4.72) - 0.008, 0.170),
        "ln_mcv": (np.log(76.5) - 0.015, 0.112),
        "ln_mchc": (np.log(33.2) - 0.006, 0.068),
        "ln_leu": (np.log(9.9), 0.30),
        "throm": (192.0, 58.0),
        "leu_throm_rho": -0.55,
        "child_frac": 0.10,
        "adult_age": (45.0, 19.0),
        "p_male": 0.55,
    },
}

# Count-preserving label noise: the same number of rows flip 0->1 and
# 1->0, emulating the irreducible triage ambiguity of real records.
LABEL_FLIP_RATE = 0.045

CLIP_SIGMA = 2.8   # truncate lognormal draws in log space
THROM_RANGE = (25.0, 599.0)
LEU_RANGE = (1.5, 35.0)


def _truncated_normal(rng, mu, sigma, size, n_sigma=CLIP_SIGMA):
    draws = rng.normal(mu, sigma, size)
    return np.clip(draws, mu - n_sigma * sigma, mu + n_sigma * sigma)


def _sample_group(rng, spec, n):
    ln_rbc = _truncated_normal(rng, *spec["ln_rbc"], n)
    ln_mcv = _truncated_normal(rng, *spec["ln_mcv"], n)
    ln_mchc = _truncated_normal(rng, *spec["ln_mchc"], n)
    rbc = np.exp(ln_rbc)
    mcv = np.exp(ln_mcv)
    mchc = np.exp(ln_mchc)
    hct = rbc * mcv / 10.0
    hgb = hct * mchc / 100.0
    mch = mchc * mcv / 100.0

    z1 = _truncated_normal(rng, 0.0, 1.0, n)
    z2 = _truncated_normal(rng, 0.0, 1.0, n)
    rho = spec["leu_throm_rho"]
    z2 = rho * z1 + np.sqrt(1.0 - rho ** 2) * z2
    mu_l, sd_l = spec["ln_leu"]
    leu = np.clip(np.exp(mu_l + sd_l * z1), *LEU_RANGE)
    mu_t, sd_t = spec["throm"]
    throm = np.clip(mu_t + sd_t * z2, *THROM_RANGE)

    child = rng.random(n) < spec["child_frac"]
    young = 1 + np.minimum(rng.geometric(0.45, n) - 1, 5)
    mu_a, sd_a = spec["adult_age"]
    adult = np.clip(np.rint(rng.normal(mu_a, sd_a, n)), 7, 99)
    age = np.where(child, young, adult).astype(np.float64)
    sex = (rng.random(n) < spec["p_male"]).astype(np.float64)
    return {
        "HAEMATOCRIT": hct, "HAEMOGLOBINS": hgb, "ERYTHROCYTE": rbc,
        "LEUCOCYTE": leu, "THROMBOCYTE": throm, "MCH": mch, "MCHC": mchc,
        "MCV": mcv, "AGE": age, "SEX": sex,
    }


def _match_unique_count(values, step, target, fixed_keys):
    """Round to the column grid, then nudge single rows until the overall
    distinct-value count (including the fixed preview rows) equals target.

    Too few distinct values: unoccupied grid slots between occupied ones
    are filled by moving one row from the nearest well-populated value
    (real lab columns owe most of their distinct values to sparse tails).
    Too many: the rarest generated-only values merge into their nearest
    neighbor. Both operations barely perturb the distribution.
    """
    keys = np.rint(np.asarray(values) / step).astype(np.int64)

    def occupied_counts():
        vals, counts = np.unique(keys, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    counts = occupied_counts()
    distinct = len(set(counts) | fixed_keys)
    guard = 0
    while distinct != target:
        guard += 1
        if guard > 5000:
            raise RuntimeError("unique-count matching did not converge")
        occ = sorted(set(counts) | fixed_keys)
        if distinct < target:
            holes = [h for lo, hi in zip(occ[:-1], occ[1:])
                     for h in range(lo + 1, hi) if hi - lo > 1]
            if not holes:
                holes = [occ[-1] + 1]
            # Prefer the hole closest to an abundant donor value.
            donors = sorted(k for k, c in counts.items() if c >= 2)
            def hole_cost(h):
                d = min(abs(h - k) for k in donors)
                return (d, h)
            hole = min(holes, key=hole_cost)
            donor = min(donors, key=lambda k: (abs(k - hole), k))
            row = int(np.flatnonzero(keys == donor)[0])
            keys[row] = hole
        else:
            movable = sorted(k for k in counts if k not in fixed_keys)
            victim = min(movable, key=lambda k: (counts[k], -abs(k)))
            others = [k for k in occ if k != victim]
            dest = min(others, key=lambda k: (abs(k - victim), k))
            keys[keys == victim] = dest
        counts = occupied_counts()
        distinct = len(set(counts) | fixed_keys)
    return np.round(keys * step, 10)


def _force_age_uniques(age, fixed_values, target):
    """Adjust a few rows so the overall AGE support has exactly `target`
    distinct values (deterministic smallest-change edits)."""
    desired_missing_pool = [v for v in range(1, 100)]
    while True:
        support = np.union1d(np.unique(age), np.asarray(sorted(fixed_values)))
        excess = support.size - target
        if excess == 0:
            return age
        if excess > 0:
            # Merge the rarest generated-only values into a neighbor.
            gen_only = [v for v in support if v not in fixed_values]
            counts = {v: int(np.sum(age == v)) for v in gen_only}
            victim = min(counts, key=lambda v: (counts[v], -v))
            rows = np.flatnonzero(age == victim)
            others = np.setdiff1d(support, [victim])
            nearest = others[np.argmin(np.abs(others - victim))]
            age[rows] = nearest
        else:
            # Introduce a missing value by flipping one modal-age row.
            missing = [v for v in desired_missing_pool
                       if v not in set(support.astype(int).tolist())]
            new_val = missing[0]
            vals, counts = np.unique(age, return_counts=True)
            modal = vals[np.argmax(counts)]
            row = int(np.flatnonzero(age == modal)[0])
            age[row] = new_val


def _grid_keys(values, step):
    return {int(round(v / step)) for v in values}


@lru_cache(maxsize=1)
def surrogate_arrays():
    """Feature matrix (file column order), labels, and sex/label text."""
    rng = np.random.default_rng(DATASET_SEED)
    n_generated = N_ROWS - len(PREVIEW_ROWS)
    n_severe = N_SEVERE - sum(r[10] for r in PREVIEW_ROWS)
    n_mild = n_generated - n_severe
    n_gray_leu = int(round(n_mild * MILD_SHARES["gray_leu"]))
    n_gray_plt = int(round(n_mild * MILD_SHARES["gray_plt"]))
    n_arm = int(round(n_mild * MILD_SHARES["arm"]))
    n_bulk = n_mild - n_gray_leu - n_gray_plt - n_arm

    parts = [
        (_sample_group(rng, GROUPS["bulk"], n_bulk), 0),
        (_sample_group(rng, GROUPS["gray_leu"], n_gray_leu), 0),
        (_sample_group(rng, GROUPS["gray_plt"], n_gray_plt), 0),
        (_sample_group(rng, GROUPS["arm"], n_arm), 0),
        (_sample_group(rng, GROUPS["severe"], n_severe), 1),
    ]
    names = list(EHR_FEATURE_NAMES)
    gen_X = np.vstack([
        np.column_stack([block[name] for name in names])
        for block, _ in parts
    ])
    gen_y = np.concatenate([
        np.full(block["AGE"].size, label, dtype=np.int64) for block, label in parts
    ])
    perm = rng.permutation(gen_X.shape[0])
    gen_X, gen_y = gen_X[perm], gen_y[perm]

    n_flips = int(round(LABEL_FLIP_RATE * gen_y.size / 2))
    zeros = np.flatnonzero(gen_y == 0)
    ones = np.flatnonzero(gen_y == 1)
    flip0 = rng.choice(zeros, n_flips, replace=False)
    flip1 = rng.choice(ones, n_flips, replace=False)
    gen_y[flip0] = 1
    gen_y[flip1] = 0

    fixed_X = np.array([[r[c] if c != 9 else (0.0 if r[9] == "F" else 1.0)
                         for c in range(10)] for r in PREVIEW_ROWS])
    fixed_y = np.array([r[10] for r in PREVIEW_ROWS], dtype=np.int64)

    for j, name in enumerate(names):
        if name == "SEX":
            continue
        if name == "AGE":
            ages = np.rint(gen_X[:, j])
            fixed_ages = {int(v) for v in fixed_X[:, j]}
            gen_X[:, j] = _force_age_uniques(ages, fixed_ages,
                                             UNIQUE_TARGETS["AGE"])
            continue
        step = GRID_STEP[name]
        fixed_keys = _grid_keys(fixed_X[:, j], step)
        gen_X[:, j] = _match_unique_count(gen_X[:, j], step,
                                          UNIQUE_TARGETS[name], fixed_keys)

    X = np.vstack([fixed_X, gen_X])
    y = np.concatenate([fixed_y, gen_y])
    return X, y


def surrogate_dataset(label_column: str = "SOURCE") -> Dataset:
    from .dataio import ehr_schema
    X, y = surrogate_arrays()
    return Dataset(schema=ehr_schema(label_column), X=X.copy(), y=y.copy(),
                   row_ids=np.arange(N_ROWS, dtype=np.int64))


def write_surrogate_csv(path, label_column: str = "SOURCE") -> None:
    from .dataio import write_csv
    write_csv(surrogate_dataset(label_column), path)
