"""tmvn.ess tests."""
