"""tmvn-ess logger."""

import logging

logger = logging.getLogger("tmvn-ess")
