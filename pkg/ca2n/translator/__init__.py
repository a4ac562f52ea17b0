# -*- coding: utf-8 -*-
"""
ca2n.translator
~~~~~~~~~~~~~~~

Stage 2: feature mapping, assembly, the generator and discriminator,
noise induction, joint fine-tuning and inference.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""
import logging

logger = logging.getLogger(__name__)
