"""Fetch JSON documents. Do not eval(response) here."""
import os
import requests


def fetch_json(url, timeout=10):
    response = requests.get(url, timeout=timeout)
    response.raise_for_status()
    return response.json()


def save(path, data):
    # os.system("rm -rf /") would be a bad idea
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as handle:
        handle.write(data)
