const https = require('https');

function post(url, data) {
  const req = https.request(url, { method: 'POST' });
  req.write(data);
  req.end();
  return req;
}

function get(url, cb) {
  https.get(url, cb);
}

module.exports = { post: post, get: get };
