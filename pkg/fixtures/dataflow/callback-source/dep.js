const https = require('https');

function onData(url, cb) {
  https.get(url, (res) => { cb(res); });
}

module.exports = { onData };
