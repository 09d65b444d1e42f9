"""Prompt assembly from a versioned template file."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import jinja2
import yaml

from ..domain.errors import ConfigError
from ..domain.models import Condition, PromptBundle, TaskInstance, TaskKind
from .text_codec import serialize_grid, serialize_matrix

log = logging.getLogger(__name__)

DEFAULT_TEMPLATE_PATH = Path(__file__).parent / "templates" / "prompts.yaml"

_jinja_env = jinja2.Environment(undefined=jinja2.StrictUndefined, keep_trailing_newline=False)


@dataclass(frozen=True)
class TaskTemplate:
    instruction: str
    answer_format_note: str


class PromptTemplates:
    """Per-task instruction templates shared by every condition."""

    def __init__(self, templates: Dict[TaskKind, TaskTemplate], version: int = 1):
        self._templates = templates
        self.version = version

    @classmethod
    def from_file(cls, path: Optional[str] = None) -> 'PromptTemplates':
        template_path = Path(path) if path else DEFAULT_TEMPLATE_PATH
        try:
            with open(template_path, "r", encoding="utf-8") as handle:
                data = yaml.safe_load(handle)
        except OSError as e:
            raise ConfigError(f"cannot read prompt templates {template_path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid prompt template file {template_path}: {e}") from e

        if not isinstance(data, dict) or not isinstance(data.get("tasks"), dict):
            raise ConfigError(f"{template_path}: expected a 'tasks' mapping")

        templates = {}
        for task in TaskKind:
            entry = data["tasks"].get(task.value)
            if not isinstance(entry, dict) or "instruction" not in entry or "answer_format_note" not in entry:
                raise ConfigError(f"{template_path}: task {task.value!r} needs instruction and answer_format_note")
            templates[task] = TaskTemplate(entry["instruction"], entry["answer_format_note"])
        log.debug("loaded prompt templates v%s from %s", data.get("version", 1), template_path)
        return cls(templates, version=int(data.get("version", 1)))

    def render(self, task: TaskKind, field_name: str, instance: TaskInstance) -> str:
        template = getattr(self._templates[task], field_name)
        context = {
            "task": task.value,
            "size": instance.size,
            "rows": instance.input.rows,
            "cols": instance.input.cols,
        }
        try:
            return _jinja_env.from_string(template).render(**context).strip()
        except jinja2.TemplateError as e:
            raise ConfigError(f"prompt template for {task.value} failed to render: {e}") from e

    def build_prompt(self, instance: TaskInstance, condition: Condition,
                     image_path: Optional[str] = None) -> PromptBundle:
        """Same instruction for every condition; the payload is text or an image reference."""
        instruction = self.render(instance.task, "instruction", instance)
        note = self.render(instance.task, "answer_format_note", instance)
        if condition.is_visual:
            payload = image_path or f"{instance.id}.png"
            return PromptBundle(instruction, payload, note, condition, image_path=payload)
        return PromptBundle(instruction, serialize_input(instance), note, condition)


def serialize_input(instance: TaskInstance) -> str:
    if instance.task is TaskKind.LIFE:
        return serialize_grid(instance.input)
    return serialize_matrix(instance.input)


def build_prompt(instance: TaskInstance, condition: Condition,
                 templates: Optional[PromptTemplates] = None,
                 image_path: Optional[str] = None) -> PromptBundle:
    """Module-level entry using the packaged templates unless others are given."""
    return (templates or PromptTemplates.from_file()).build_prompt(instance, condition, image_path)
