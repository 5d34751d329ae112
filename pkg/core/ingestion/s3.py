"""S3-based data source implementation (works with AWS or LocalStack)."""

import logging
import os
from urllib.parse import urlparse

import boto3
from botocore.exceptions import ClientError

from core.exceptions import DataSourceError
from core.forward import DataG
from core.ingestion.base import data_from_table

logger = logging.getLogger(__name__)


class S3DataSource:
    """Downloads a data table from an ``s3://bucket/key`` object."""

    def __init__(self, endpoint_url: str | None = None, encoding: str = "utf-8"):
        self.endpoint_url = endpoint_url
        self.encoding = encoding

    def read(self, source: str) -> DataG:
        parsed = urlparse(source)
        bucket_name, object_key = parsed.netloc, parsed.path.lstrip("/")
        if parsed.scheme != "s3" or not bucket_name or not object_key:
            raise DataSourceError(f"Cannot parse S3 location: {source}")

        # Credentials fallback for LocalStack usage
        s3 = boto3.client(
            "s3",
            aws_access_key_id=os.getenv("AWS_ACCESS_KEY_ID", "test"),
            aws_secret_access_key=os.getenv("AWS_SECRET_ACCESS_KEY", "test"),
            region_name=os.getenv("AWS_REGION", "us-east-1"),
            endpoint_url=self.endpoint_url,
        )

        try:
            response = s3.get_object(Bucket=bucket_name, Key=object_key)
        except ClientError as e:
            raise DataSourceError(f"Error fetching from S3: {e}") from e
        try:
            text = response["Body"].read().decode(self.encoding)
        except UnicodeDecodeError as e:
            raise DataSourceError(f"Object {source} is not valid {self.encoding} text: {e}") from e
        data = data_from_table(text, source)
        logger.info("read data bucket=%s key=%s n_k=%d", bucket_name, object_key, data.k_grid.n_k)
        return data
