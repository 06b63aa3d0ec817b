from .translator import MessageCatalog

__all__ = ["MessageCatalog"]
