"""Public re-exports for the core ingestion sub-package."""

from .base import DATA_COLUMNS, DataSource, data_from_table
from .file import FileDataSource
from .s3 import S3DataSource

__all__: list[str] = [
    "DATA_COLUMNS",
    "DataSource",
    "data_from_table",
    "FileDataSource",
    "S3DataSource",
]
