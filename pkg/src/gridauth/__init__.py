"""Image-grid password authentication.

Registration hands the user a generated 4-digit key; login enters that
key by clicking pass-image copies on a 10x10 grid that reshuffles after
every click, optionally transformed with the day's digit to resist
shoulder surfing.  Credentials rest AES-encrypted; repeated failures
lock the account.
"""

from .keys import KeyNumber, decode_ssr, digital_root, encode_ssr, generate_key, verify_key
from .grid import GridLayout, generate_layout, resolve_click

__version__ = "0.1.0"

__all__ = [
    "KeyNumber",
    "GridLayout",
    "decode_ssr",
    "digital_root",
    "encode_ssr",
    "generate_key",
    "generate_layout",
    "resolve_click",
    "verify_key",
    "__version__",
]
