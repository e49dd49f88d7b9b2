from .info import VERSION as __version__
