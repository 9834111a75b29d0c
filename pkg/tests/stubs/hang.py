"""Forks a child that would outlive us, records both pids, then hangs."""
import os
import subprocess
import sys
import time

child = subprocess.Popen([sys.executable, "-c", "import time; time.sleep(600)"])
with open(sys.argv[2], "w") as fh:
    fh.write(f"{os.getpid()} {child.pid}\n")
print("% still thinking", flush=True)
time.sleep(600)
