# -*- coding: utf-8 -*-
"""
ca2n.plugins.manager
~~~~~~~~~~~~~~~~~~~~

Plugin Manager for ca2n

:copyright: 2024, the ca2n Team
:license: BSD, see LICENSE for more details
"""

import logging

import pluggy

logger = logging.getLogger(__name__)


class CA2NPluginManager(pluggy.PluginManager):
    """Overwrites :class:`pluggy.PluginManager` to keep track of which
    plugins ship with ca2n itself.
    """

    def __init__(self, project_name="ca2n"):
        super(CA2NPluginManager, self).__init__(project_name=project_name)
        self._internal_names = set()

    def register(self, plugin, name=None, internal=False):
        """Register a plugin and return its canonical name or None
        if the name is blocked from registering.
        Raise a ValueError if the plugin is already registered.
        """
        name = super(CA2NPluginManager, self).register(plugin, name)
        if internal and name is not None:
            self._internal_names.add(name)
        return name

    def unregister(self, plugin=None, name=None):
        """Unregister a plugin object and all its contained hook implementations
        from internal data structures.
        """
        if name is None and plugin is not None:
            name = self.get_name(plugin)
        plugin = super(CA2NPluginManager, self).unregister(plugin=plugin, name=name)
        self._internal_names.discard(name)
        return plugin

    def load_setuptools_entrypoints(self, group, name=None):
        """Load plugins registered under the ``group`` entry point.
        Return the number of loaded plugins."""
        logger.info("Loading plugins under entrypoint {}".format(group))
        count = super(CA2NPluginManager, self).load_setuptools_entrypoints(
            group, name=name
        )
        logger.info("Loaded {} plugins for entrypoint {}".format(count, group))
        return count

    def get_internal_plugins(self):
        """Returns a set of registered internal plugins."""
        plugins = (self.get_plugin(name) for name in self._internal_names)
        return {plugin for plugin in plugins if plugin is not None}

    def get_external_plugins(self):
        """Returns a set of registered external plugins."""
        return set(self.get_plugins()) - self.get_internal_plugins()

    def collect(self, hook_name, **kwargs):
        """Calls ``hook_name`` and merges the dicts it returns. Later
        registrations win on name clashes, with a warning."""
        merged = {}
        for result in reversed(getattr(self.hook, hook_name)(**kwargs)):
            for key, value in (result or {}).items():
                if key in merged:
                    logger.warning("{} overrides {!r}".format(hook_name, key))
                merged[key] = value
        return merged
