"""HTTP adapter serving image-embedding and vision-language models.

Speaks the decision engine's wire protocol (POST /v1/embed, POST /v1/chat,
GET /healthz) so the engine can run against real models instead of its
offline mocks. Backends are pluggable: deterministic hash/echo backends
need no model weights; transformer backends load whatever checkpoints the
operator supplies.
"""

from .config import AdapterConfig
from .service import create_app

__version__ = "0.1.0"
