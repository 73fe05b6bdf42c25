"""Reference server for the normalization wire protocol.

Speaks newline-delimited JSON over stdio or HTTP POST ``/v1/op`` and
answers three operations (``detect``, ``infill``, ``generate``) plus a
``hello`` handshake.  Two responders are provided: an oracle that answers
from a gold annotation file (for integration testing of clients without
any model), and a responder backed by pretrained fill-mask and
text-generation models.
"""

from .protocol import handle_line, handle_request
from .echo import EchoResponder

__version__ = "0.1.0"
