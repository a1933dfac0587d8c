import csv

import pytest

from atmscore.dataset import FEATURE_COLUMNS, ID_COLUMNS, SynthConfig, generate_synthetic


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


ZIP_HEADER = list(ID_COLUMNS) + list(FEATURE_COLUMNS)


def zip_row(zipcode, county="Alpha", **overrides):
    values = {
        "population_density": 1000.0,
        "median_household_income": 60000.0,
        "pct_not_earning": 30.0,
        "transportation_pct": 10.0,
        "employment_pct": 55.0,
        "private_primary_school_pct": 12.0,
        "median_home_value": 400000.0,
        "rented_1br_pct": 8.0,
        "educated_pct": 35.0,
        "earning_pct": 65.0,
        "single_pct": 30.0,
        "single_with_roommates_pct": 6.0,
    }
    values.update(overrides)
    return [zipcode, county, "34.05", "-118.25"] + [values[c] for c in FEATURE_COLUMNS]


@pytest.fixture
def small_config():
    return SynthConfig(n_zipcodes=150, n_counties=5, n_atms=600, n_extra_features=6)


@pytest.fixture
def small_data(tmp_path, small_config):
    return generate_synthetic(small_config, seed=11, out_dir=tmp_path / "data")
