"""Render the markdown experiment summary from the Jinja2 template."""

from __future__ import annotations

import logging
from collections.abc import (
    Mapping,
    Sequence,
)
from pathlib import Path
from typing import Any

from jinja2 import (
    Environment,
    FileSystemLoader,
)

logger = logging.getLogger(__name__)

SUMMARY_METRICS = ("jaccard", "fm", "f1", "kulczynski", "modularity")


class SummaryRenderer:
    """Renderer for the per-experiment markdown summary table."""

    def __init__(self, template_dir: Path, output_file: Path, template_name: str = "summary.md.j2") -> None:
        """Initialize the renderer with template and output locations."""
        self.template_dir = template_dir
        self.output_file = output_file
        self.template_name = template_name

    def render(self, title: str, rows: Sequence[Mapping[str, Any]], parameters: Mapping[str, Any]) -> str:
        """Render summary text from aggregate rows."""
        environment = Environment(loader=FileSystemLoader(self.template_dir), trim_blocks=True, lstrip_blocks=True)
        template = environment.get_template(self.template_name)
        metrics = [metric for metric in SUMMARY_METRICS if rows and f"{metric}_median" in rows[0]]
        degenerate = [row["name"] for row in rows if int(row.get("degenerate_runs", 0))]
        return template.render(
            title=title,
            rows=rows,
            metrics=metrics,
            parameters=sorted(parameters.items()),
            degenerate=degenerate,
        )

    def write(self, title: str, rows: Sequence[Mapping[str, Any]], parameters: Mapping[str, Any]) -> None:
        """Render and write the summary to disk."""
        rendered = self.render(title, rows, parameters)
        self.output_file.parent.mkdir(parents=True, exist_ok=True)
        self.output_file.write_text(rendered + "\n", encoding="utf-8")
        logger.info("Render output: file=%s template=%s", self.output_file, self.template_dir / self.template_name)
