import json
import os
import shutil
import tempfile


class Store:
    def __init__(self):
        self.root = tempfile.mkdtemp(prefix="tmpcache-")

    def put_value(self, key, value):
        path = os.path.join(self.root, key)
        with open(path, "w") as f:
            json.dump(value,
                      f)

    def get_value(self, key):
        path = os.path.join(self.root, key)
        if not os.path.exists(path):
            return None
        with open(path) as f:
            return json.load(f)

    def clear(self):
        shutil.rmtree(self.root)
        for name in os.listdir(tempfile.gettempdir()):
            if name.startswith("tmpcache-"):
                os.remove(os.path.join(tempfile.gettempdir(), name))
