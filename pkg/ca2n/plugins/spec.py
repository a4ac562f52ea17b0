# -*- coding: utf-8 -*-
"""
ca2n.plugins.spec
~~~~~~~~~~~~~~~~~

This module provides the core ca2n plugin hook definitions

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

from pluggy import HookspecMarker

spec = HookspecMarker("ca2n")


@spec
def ca2n_enhancement_modes():
    """Hook for registering additional enhancement modes.

    Return a ``{name: callable}`` dict. The callable receives the
    generated image as a ``[3, S, S]`` array in ``[0, 1]`` plus the keyword
    parameters of the hook configuration and returns an array of the same
    shape::

        @impl
        def ca2n_enhancement_modes():
            return {"restore": run_restoration_network}
    """


@spec(firstresult=True)
def ca2n_feature_extractor(config):
    """Hook for supplying the fixed feature network the perceptual loss
    compares images with. The first non-``None`` result wins; without
    one a seeded random network is used.

    :param config: The :class:`ca2n.utils.settings.RunConfig`.
    """


@spec
def ca2n_gradcheck_cases():
    """Hook for registering gradient check cases.

    Return a ``{name: GradcheckCase}`` dict. ca2n registers its own
    composite cases through this hook.
    """


@spec
def ca2n_cli(cli):
    """Hook for registering CLI commands.

    For example::

        @impl
        def ca2n_cli(cli):
            @cli.command()
            def testplugin():
                click.echo("Hello Testplugin")

            return testplugin

    :param click.Group cli: The ca2n CLI object.
    """
