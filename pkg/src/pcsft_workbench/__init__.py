#!/usr/bin/env python3
#
# Copyright (c) PCSFT Workbench developers
# Distributed under the terms of the 3-clause BSD License.

from ._version import __version__

# suppress warning
__version__
