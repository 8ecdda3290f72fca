"""YAML prompt templates for LLM-backed parsing and entity alignment."""

from comclip.prompts.loader import PromptTemplate, get_prompt, parse_json_reply

__all__ = ["PromptTemplate", "get_prompt", "parse_json_reply"]
