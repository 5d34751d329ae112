"""File-based data source implementation."""

import logging
from pathlib import Path

from core.exceptions import DataSourceError
from core.forward import DataG
from core.ingestion.base import data_from_table

logger = logging.getLogger(__name__)


class FileDataSource:
    """Reads a tab-separated data table written by the ``forward`` command."""

    def __init__(self, encoding: str = "utf-8"):
        self.encoding = encoding

    def read(self, source: str) -> DataG:
        try:
            text = Path(source).read_text(encoding=self.encoding)
        except OSError as e:
            raise DataSourceError(f"Error reading data file {source}: {e}") from e
        data = data_from_table(text, source)
        logger.info("read data file=%s n_k=%d", source, data.k_grid.n_k)
        return data
