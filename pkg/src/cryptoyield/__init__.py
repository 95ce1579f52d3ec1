"""Quantitative models of crypto yield mechanisms.

Modules:
  core     -- rate conventions, return statistics, Sharpe/Kelly, percentiles
  staking  -- proof-of-stake validator returns, slashing, percentile bands
  amm      -- constant-product pool state machine and impermanent loss
  lending  -- collateralised loan pricing (exchange option + one-touch penalty)
  perps    -- perpetual futures funding engines and futures basis
  optrates -- put-call-parity implied discount factors and rates
  xccy     -- margined cross-currency swap state machine
  mc       -- Monte Carlo pricing oracle used to validate the closed forms
  cli      -- scenario execution and report emission
"""

__version__ = "0.1.0"
