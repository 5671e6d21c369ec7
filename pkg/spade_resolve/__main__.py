# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import sys

from .cli import main

sys.exit(main())
