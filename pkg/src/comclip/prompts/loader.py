"""
Prompt templates for the LLM parsing and alignment calls.

Each template is a YAML file next to this module holding the instruction, a
user template with ``{placeholders}`` and the JSON output contract. The LLM
wire contract takes one string, so `PromptTemplate.render` joins the three.
"""

import json
from functools import cache
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict

from comclip.clients.base import ClientResponseError

PROMPTS_DIR = Path(__file__).parent

_REPLY_PREVIEW = 200


class PromptTemplate(BaseModel):
    """An LLM prompt: instruction, user template and output-format contract."""

    name: str
    version: str = "1.0"
    description: str = ""
    instruction: str
    user_template: str
    output_format: str

    model_config = ConfigDict(frozen=True, extra="forbid")

    def format_user_prompt(self, **values: Any) -> str:
        """Fill the user template. Braces inside values are kept literally.

        Raises:
            KeyError: If the template names a placeholder not in ``values``.
        """
        escaped = {
            k: v.replace("{", "{{").replace("}", "}}") if isinstance(v, str) else v
            for k, v in values.items()
        }
        return self.user_template.format(**escaped)

    def render(self, **values: Any) -> str:
        parts = (self.instruction, self.format_user_prompt(**values), self.output_format)
        return "\n\n".join(part.strip() for part in parts)


@cache
def get_prompt(name: str) -> PromptTemplate:
    """The bundled template ``<name>.yaml``, validated.

    Raises:
        FileNotFoundError: If no such template is bundled.
        ValueError: If the file is not a valid template.
    """
    path = PROMPTS_DIR / f"{name}.yaml"
    if not path.is_file():
        raise FileNotFoundError(f"Prompt template not found: {name}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ValueError(f"Prompt template {name!r} is not valid YAML: {e}") from e
    if not isinstance(raw, dict):
        raise ValueError(f"Prompt template {name!r} must be a mapping")
    return PromptTemplate.model_validate(raw)


def parse_json_reply(text: str) -> dict[str, Any]:
    """Return the first JSON object embedded in an LLM reply.

    Code fences and surrounding prose are tolerated: decoding starts at each
    ``{`` in turn until one parses as an object.

    Raises:
        ClientResponseError: If the reply holds no JSON object.
    """
    decoder = json.JSONDecoder()
    start = text.find("{")
    while start != -1:
        try:
            value, _ = decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            value = None
        if isinstance(value, dict):
            return value
        start = text.find("{", start + 1)
    raise ClientResponseError(f"No JSON object in reply: {text[:_REPLY_PREVIEW]!r}")
