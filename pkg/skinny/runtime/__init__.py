################################################################################
# skinny/runtime/__init__.py
#
# This file is part of the skinny_factor software suite.
#
# It contains the top-level interface to the driver/executor runtime.
#
# Copyright 2026 the skinny_factor authors
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.
################################################################################

from .context import (DistMatrix,
                      ExecContext,
                      block_sizes,
                      create_context,
                      execute_stage,
                      partition,
                      tree_combine)
from .executor import clock
from .metrics import (BIN_NAMES,
                      StageMetrics,
                      TaskBins,
                      TaskRecord,
                      bin_task,
                      write_stage_metrics)
