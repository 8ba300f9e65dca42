"""
报告模板加载器
使用Jinja2加载和渲染CLI文本报告
"""

import logging
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined, Template, TemplateNotFound

logger = logging.getLogger(__name__)


def _fmt(value, digits: int = 6) -> str:
    """浮点数定宽显示, None显示为 '-'"""
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


class ReportLoader:
    """报告模板加载和渲染器"""

    def __init__(self, reports_dir: str | Path | None = None):
        """
        初始化报告加载器

        Args:
            reports_dir: 模板目录路径, 默认项目根目录下的reports
        """
        if reports_dir:
            self.reports_dir = Path(reports_dir)
        else:
            project_root = Path(__file__).parent.parent.parent
            self.reports_dir = project_root / "reports"

        self.env = Environment(
            loader=FileSystemLoader(str(self.reports_dir)),
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
            undefined=StrictUndefined,
        )
        self.env.filters["fmt"] = _fmt

        logger.debug(f"ReportLoader initialized with directory: {self.reports_dir}")

    def load_template(self, template_name: str) -> Template:
        """
        加载报告模板

        Raises:
            FileNotFoundError: 模板文件不存在
        """
        try:
            return self.env.get_template(template_name)
        except TemplateNotFound as e:
            error_msg = f"Template not found: {template_name} in {self.reports_dir}"
            logger.error(error_msg)
            raise FileNotFoundError(error_msg) from e

    def render(self, template_name: str, **kwargs) -> str:
        """
        加载并渲染报告

        Args:
            template_name: 模板文件名
            **kwargs: 模板变量

        Returns:
            渲染后的文本
        """
        rendered = self.load_template(template_name).render(**kwargs)
        logger.debug(f"Template rendered: {template_name}, output length: {len(rendered)} chars")
        return rendered
