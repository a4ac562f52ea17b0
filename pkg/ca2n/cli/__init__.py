# -*- coding: utf-8 -*-
"""
ca2n.cli
~~~~~~~~

ca2n's Command Line Interface.
To make it work, you have to install ca2n via ``pip install -e .``.

Plugins add their own commands through the ``ca2n_cli`` hook.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from ca2n.cli.main import ca2n  # noqa
