"""Upload a data table written by ``python -m core forward`` to a LocalStack bucket.

Afterwards an inversion can read it with::

    data_source: s3://mock-inversion-bucket/data.tsv
    s3_endpoint_url: http://localhost:4566
"""

import argparse
import logging
from pathlib import Path

import boto3
from botocore.exceptions import ClientError

from core.cli import LOG_FORMAT

logger = logging.getLogger(__name__)

# Config for LocalStack
ENDPOINT_URL = "http://localhost:4566"
BUCKET_NAME = "mock-inversion-bucket"
OBJECT_KEY = "data.tsv"

DEFAULT_TABLE = Path(__file__).parent / "../../results/data.tsv"


def make_client(endpoint_url: str = ENDPOINT_URL):
    # Dummy creds for LocalStack
    return boto3.client(
        "s3",
        endpoint_url=endpoint_url,
        aws_access_key_id="test",
        aws_secret_access_key="test",
        region_name="us-east-1",
    )


def create_bucket(s3, bucket: str = BUCKET_NAME) -> None:
    try:
        s3.create_bucket(Bucket=bucket)
        logger.info("bucket %s created", bucket)
    except s3.exceptions.BucketAlreadyOwnedByYou:
        logger.info("bucket %s already exists", bucket)


def upload_table(s3, table: Path, bucket: str = BUCKET_NAME, key: str = OBJECT_KEY) -> str:
    if not table.exists():
        raise FileNotFoundError(f"Data table not found: {table}; run 'python -m core forward' first")
    try:
        s3.upload_file(str(table), bucket, key)
    except ClientError as e:
        raise RuntimeError(f"Error uploading {table}: {e}") from e
    location = f"s3://{bucket}/{key}"
    logger.info("uploaded %s to %s", table, location)
    return location


def list_bucket_contents(s3, bucket: str = BUCKET_NAME) -> None:
    response = s3.list_objects_v2(Bucket=bucket)
    for obj in response.get("Contents", []):
        logger.info("object %s size=%s", obj["Key"], obj.get("Size"))


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--table", type=Path, default=DEFAULT_TABLE)
    parser.add_argument("--endpoint-url", default=ENDPOINT_URL)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)

    client = make_client(args.endpoint_url)
    create_bucket(client)
    upload_table(client, args.table)
    list_bucket_contents(client)
