const https = require('https');

function send(url, data) {
  const req = https.request(url);
  req.write(data);
  return req;
}

module.exports = { send };
