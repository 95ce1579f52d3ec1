"""Shared numeric conventions, time-series statistics and portfolio utilities.

Everything downstream (pool yields, loan pricing, funding, implied rates)
quotes rates per 365 days by default and estimates volatility from log
returns of a price series.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import (
    DomainError,
    IllConditionedError,
    InputError,
    InsufficientDataError,
    SpacingError,
    UndefinedRatioError,
)

SECONDS_PER_DAY = 86_400.0

# Relative spread of observation spacing tolerated before refusing to
# annualize; irregular series must be resampled by the caller instead.
SPACING_TOLERANCE = 0.01

# Condition number above which the Kelly solve is refused.
KELLY_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class RateConvention:
    """Day-count and compounding convention for quoting annualized rates.

    The default is the crypto market convention: rates in fractions per
    365 days, continuous compounding.
    """

    days_per_year: float = 365.0
    compounding: str = "continuous"

    def __post_init__(self):
        if self.days_per_year <= 0:
            raise DomainError(f"days_per_year must be > 0, got {self.days_per_year}")
        if self.compounding not in ("continuous", "simple"):
            raise DomainError(f"unknown compounding {self.compounding!r}")

    def year_fraction(self, seconds: float) -> float:
        """Convert a duration in seconds to years under this convention."""
        return seconds / (SECONDS_PER_DAY * self.days_per_year)

    def rate_from_growth(self, growth: float, tenor_years: float) -> float:
        """Annualized rate implied by a gross growth factor over ``tenor_years``.

        growth = price_end / price_start; continuous: r = ln(growth)/t,
        simple: r = (growth - 1)/t.
        """
        if tenor_years <= 0:
            raise DomainError(f"tenor must be > 0, got {tenor_years}")
        if growth <= 0:
            raise DomainError(f"growth factor must be > 0, got {growth}")
        if self.compounding == "continuous":
            return math.log(growth) / tenor_years
        return (growth - 1.0) / tenor_years

    def rate_from_simple_return(self, net_return: float, tenor_years: float) -> float:
        """Annualized rate from a net return over ``tenor_years``.

        Uses log1p so tiny returns keep their sign instead of underflowing
        through 1 + net_return.
        """
        if tenor_years <= 0:
            raise DomainError(f"tenor must be > 0, got {tenor_years}")
        if net_return <= -1.0:
            raise DomainError(f"net return must exceed -1, got {net_return}")
        if self.compounding == "continuous":
            return math.log1p(net_return) / tenor_years
        return net_return / tenor_years


@dataclass(frozen=True)
class PriceSeries:
    """Timestamped prices of one token in numeraire units.

    observations: sequence of (timestamp in UTC epoch seconds, price > 0),
    strictly increasing in time.
    """

    observations: tuple

    def __init__(self, observations):
        obs = tuple((float(t), float(p)) for t, p in observations)
        for i, (t, p) in enumerate(obs):
            if p <= 0:
                raise DomainError(f"price at index {i} must be > 0, got {p}")
            if i > 0 and t <= obs[i - 1][0]:
                raise DomainError(f"timestamps must be strictly increasing at index {i}")
        object.__setattr__(self, "observations", obs)

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def timestamps(self) -> np.ndarray:
        return np.array([t for t, _ in self.observations])

    @property
    def prices(self) -> np.ndarray:
        return np.array([p for _, p in self.observations])

    @classmethod
    def from_csv(cls, path) -> "PriceSeries":
        """Load a ``timestamp,price`` CSV.

        Timestamps may be ISO-8601 (assumed UTC when naive) or integer epoch
        seconds; prices use ``.`` as the decimal separator.
        """
        rows = read_csv_rows(path, ["timestamp", "price"])
        obs = []
        for lineno, row in rows:
            try:
                obs.append((parse_timestamp(row["timestamp"]), float(row["price"])))
            except (ValueError, DomainError) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
        try:
            return cls(obs)
        except DomainError as exc:
            raise InputError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class ReturnStats:
    """Per-period return moments plus the sampling frequency.

    mean and vol are per observation period; periods_per_year converts them
    to annualized terms.
    """

    mean: float
    vol: float
    periods_per_year: float

    def __post_init__(self):
        if self.vol < 0:
            raise DomainError(f"vol must be >= 0, got {self.vol}")
        if self.periods_per_year <= 0:
            raise DomainError(f"periods_per_year must be > 0, got {self.periods_per_year}")

    @property
    def annualized_mean(self) -> float:
        return self.mean * self.periods_per_year

    @property
    def annualized_vol(self) -> float:
        return self.vol * math.sqrt(self.periods_per_year)

    @classmethod
    def from_series(cls, series: PriceSeries, convention: RateConvention = RateConvention()):
        """Estimate per-period stats from log returns of a uniformly spaced series."""
        returns = log_returns(series)
        if len(returns) < 2:
            raise InsufficientDataError("need at least 3 observations for return stats")
        spacing = _uniform_spacing(series)
        periods_per_year = convention.days_per_year * SECONDS_PER_DAY / spacing
        return cls(
            mean=float(np.mean(returns)),
            vol=float(np.std(returns, ddof=1)),
            periods_per_year=periods_per_year,
        )


def log_returns(series: PriceSeries) -> np.ndarray:
    """Per-interval log returns ln(p[i+1]/p[i]); length is n-1."""
    if len(series) < 2:
        raise InsufficientDataError("need at least 2 observations for returns")
    prices = series.prices
    return np.log(prices[1:] / prices[:-1])


def _uniform_spacing(series: PriceSeries) -> float:
    """Mean observation spacing in seconds; rejects irregular series."""
    dts = np.diff(series.timestamps)
    mean_dt = float(np.mean(dts))
    if np.max(np.abs(dts - mean_dt)) > SPACING_TOLERANCE * mean_dt:
        raise SpacingError(
            "observation spacing varies by more than "
            f"{SPACING_TOLERANCE:.0%}; resample before estimating volatility"
        )
    return mean_dt


def realized_vol(series: PriceSeries, convention: RateConvention = RateConvention()) -> float:
    """Annualized volatility: sample std of log returns times sqrt(periods/year)."""
    if len(series) < 3:
        raise InsufficientDataError("need at least 3 observations for realized vol")
    spacing = _uniform_spacing(series)
    returns = log_returns(series)
    periods_per_year = convention.days_per_year * SECONDS_PER_DAY / spacing
    return float(np.std(returns, ddof=1)) * math.sqrt(periods_per_year)


def sharpe_ratio(stats: ReturnStats, riskless_rate: float) -> float:
    """(annualized mean - riskless rate) / annualized vol."""
    if stats.vol == 0:
        raise UndefinedRatioError("Sharpe ratio undefined for zero volatility")
    return (stats.annualized_mean - riskless_rate) / stats.annualized_vol


def kelly_weights(means, riskless_rate: float, covariance) -> np.ndarray:
    """Log-optimal allocation fractions w = C^-1 (mu - r).

    Solves the continuous-time lognormal growth-rate maximization; weights
    are not normalized and may exceed 1 (leverage) or be negative (shorts).
    """
    mu = np.asarray(means, dtype=float)
    cov = np.asarray(covariance, dtype=float)
    if mu.ndim != 1:
        raise DomainError("means must be a vector")
    if cov.shape != (mu.size, mu.size):
        raise DomainError(f"covariance shape {cov.shape} does not match {mu.size} assets")
    if not np.allclose(cov, cov.T, rtol=1e-12, atol=0.0):
        raise DomainError("covariance must be symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError("covariance is not positive definite") from exc
    cond = np.linalg.cond(cov)
    if cond > KELLY_CONDITION_LIMIT:
        raise IllConditionedError(f"covariance condition number {cond:.3e} exceeds 1e12")
    return np.linalg.solve(cov, mu - riskless_rate)


def percentile(values, p: float) -> float:
    """Percentile by linear interpolation between closest ranks."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise DomainError("percentile of an empty list is undefined")
    if not 0.0 <= p <= 100.0:
        raise DomainError(f"percentile level must be in [0, 100], got {p}")
    return float(np.percentile(vals, p))


# ---------------------------------------------------------------------------
# CSV plumbing shared by the ingestion loaders
# ---------------------------------------------------------------------------


def read_csv_rows(path, required_columns):
    """Read a CSV with an exact set of required columns.

    Returns a list of (line_number, row_dict). Raises InputError naming the
    file, line and offending column on any mismatch.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise InputError(f"{path}: empty file, expected header {','.join(required_columns)}")
        missing = [c for c in required_columns if c not in header]
        if missing:
            raise InputError(
                f"{path}:1: missing column(s) {', '.join(missing)}; got header {','.join(header)}"
            )
        rows = []
        for row in reader:
            lineno = reader.line_num
            if any(row.get(c) in (None, "") for c in required_columns):
                bad = [c for c in required_columns if row.get(c) in (None, "")]
                raise InputError(f"{path}:{lineno}: empty value for column(s) {', '.join(bad)}")
            rows.append((lineno, row))
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def parse_timestamp(text: str) -> float:
    """Parse an ISO-8601 timestamp (UTC when naive) or epoch seconds."""
    text = text.strip()
    try:
        return float(int(text))
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    iso = text.replace("Z", "+00:00")
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError as exc:
        raise DomainError(f"unparseable timestamp {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()
