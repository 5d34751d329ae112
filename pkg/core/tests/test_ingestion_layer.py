import logging
import sys
from pathlib import Path
from unittest.mock import Mock, patch

import numpy as np
import pytest
from botocore.exceptions import ClientError

# Add parent directory to path so we can import core modules
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.exceptions import DataSourceError
from core.forward import bump_profile, synth_data
from core.grid import make_grid, make_k_grid
from core.ingestion import DATA_COLUMNS, FileDataSource, S3DataSource, data_from_table
from core.pipeline import DataSourceFactory, data_table
from core.results import write_table


@pytest.fixture
def data():
    return synth_data(bump_profile(make_grid(1.0, 41)), make_k_grid(1.0, 3.0, 5))


@pytest.fixture
def table_path(tmp_path, data):
    return write_table(tmp_path / "data.tsv", DATA_COLUMNS, data_table(data))


class TestFileDataSource:
    def test_reads_a_written_table(self, table_path, data):
        loaded = FileDataSource().read(str(table_path))
        assert loaded.k_grid == data.k_grid
        np.testing.assert_allclose(loaded.g_values, data.g_values, rtol=1e-11)
        np.testing.assert_allclose(loaded.v0_prime, data.v0_prime, rtol=1e-11)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataSourceError, match="Error reading data file"):
            FileDataSource().read(str(tmp_path / "absent.tsv"))

    def test_header_line_is_required(self, tmp_path):
        path = tmp_path / "bare.tsv"
        path.write_text("1\t-0.5\t0\t0.5\t0\n")
        with pytest.raises(DataSourceError, match="header"):
            FileDataSource().read(str(path))


class TestDataTable:
    def header(self):
        return "# " + "\t".join(DATA_COLUMNS) + "\n"

    def test_wrong_columns(self):
        with pytest.raises(DataSourceError, match="columns"):
            data_from_table("# k\tg\n1\t2\n", "inline")

    def test_needs_three_frequencies(self):
        text = self.header() + "1\t-0.5\t0\t0.5\t0\n2\t-0.5\t0\t0.35\t0\n"
        with pytest.raises(DataSourceError, match="at least 3"):
            data_from_table(text, "inline")

    def test_needs_uniform_k(self):
        rows = ["1\t-0.5\t0\t0.5\t0", "2\t-0.5\t0\t0.35\t0", "4\t-0.5\t0\t0.25\t0"]
        with pytest.raises(DataSourceError, match="uniform"):
            data_from_table(self.header() + "\n".join(rows) + "\n", "inline")


class TestS3DataSource:
    @patch("core.ingestion.s3.boto3.client")
    def test_successful_read(self, mock_client, table_path, data):
        body = Mock()
        body.read.return_value = table_path.read_bytes()
        mock_client.return_value.get_object.return_value = {"Body": body}

        source = S3DataSource(endpoint_url="http://localhost:4566")
        loaded = source.read("s3://mock-inversion-bucket/data.tsv")

        mock_client.return_value.get_object.assert_called_with(Bucket="mock-inversion-bucket", Key="data.tsv")
        assert mock_client.call_args.kwargs["endpoint_url"] == "http://localhost:4566"
        np.testing.assert_allclose(loaded.g_values, data.g_values, rtol=1e-11)

    @patch("core.ingestion.s3.boto3.client")
    def test_client_error(self, mock_client):
        mock_client.return_value.get_object.side_effect = ClientError(
            {"Error": {"Code": "NoSuchBucket", "Message": "missing"}}, "GetObject"
        )
        with pytest.raises(DataSourceError, match="Error fetching from S3"):
            S3DataSource().read("s3://non-existent-bucket/data.tsv")

    @patch("core.ingestion.s3.boto3.client")
    def test_undecodable_body(self, mock_client):
        body = Mock()
        body.read.return_value = b"k\tg\n\xff\xfe\x00\n"
        mock_client.return_value.get_object.return_value = {"Body": body}
        with pytest.raises(DataSourceError, match="not valid utf-8 text"):
            S3DataSource().read("s3://mock-inversion-bucket/data.tsv")

    def test_bad_location(self):
        with pytest.raises(DataSourceError, match="Cannot parse S3 location"):
            S3DataSource().read("s3://bucket-only")


class TestDataSourceFactory:
    def test_s3(self):
        source = DataSourceFactory.create_data_source("s3://bucket/data.tsv", endpoint_url="http://x")
        assert isinstance(source, S3DataSource)
        assert source.endpoint_url == "http://x"

    def test_file(self, table_path):
        assert isinstance(DataSourceFactory.create_data_source(str(table_path)), FileDataSource)
        assert isinstance(DataSourceFactory.create_data_source("later.tsv"), FileDataSource)

    def test_unknown(self):
        with pytest.raises(DataSourceError, match="Cannot determine data source"):
            DataSourceFactory.create_data_source("https://example.com/data")


class TestMockS3Script:
    def test_upload_table(self, table_path):
        from core.scripts.setup_mock_s3 import BUCKET_NAME, create_bucket, upload_table

        client = Mock()
        create_bucket(client)
        location = upload_table(client, table_path)
        client.create_bucket.assert_called_with(Bucket=BUCKET_NAME)
        client.upload_file.assert_called_with(str(table_path), BUCKET_NAME, "data.tsv")
        assert location == "s3://mock-inversion-bucket/data.tsv"

    def test_missing_table(self, tmp_path):
        from core.scripts.setup_mock_s3 import upload_table

        with pytest.raises(FileNotFoundError, match="forward"):
            upload_table(Mock(), tmp_path / "absent.tsv")

    def test_reports_through_logging(self, table_path, caplog, capsys):
        from core.scripts.setup_mock_s3 import create_bucket, list_bucket_contents, upload_table

        client = Mock()
        client.list_objects_v2.return_value = {"Contents": [{"Key": "data.tsv", "Size": 120}]}
        with caplog.at_level(logging.INFO, logger="core.scripts.setup_mock_s3"):
            create_bucket(client)
            upload_table(client, table_path)
            list_bucket_contents(client)
        messages = [r.getMessage() for r in caplog.records]
        assert messages[0] == "bucket mock-inversion-bucket created"
        assert messages[-1] == "object data.tsv size=120"
        assert capsys.readouterr().out == ""
