"""Console, JSON, CSV and HTML reporters."""

from comclip.reports.console import ConsoleReporter
from comclip.reports.csv_export import CSVReporter
from comclip.reports.html import HTMLReporter
from comclip.reports.json_export import JSONReporter

__all__ = ["CSVReporter", "ConsoleReporter", "HTMLReporter", "JSONReporter"]
