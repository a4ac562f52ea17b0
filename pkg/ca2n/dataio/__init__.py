# -*- coding: utf-8 -*-
"""
ca2n.dataio
~~~~~~~~~~~

Synthetic and on-disk sketch/photo pairs.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from .dataset import (  # noqa
    DatasetManifest,
    PairedSample,
    load_dataset,
    save_dataset,
    split_train_test,
)
from .netpbm import export_image, read_image, write_image  # noqa
from .synthetic import restyle, synth_faces  # noqa
